#include "mesh.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace tpe {

double Mesh::tri_area(int t) const {
    const auto& tri = triangles[t];
    Vec2 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec2 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

Mat2 Mesh::tri_jacobian(int t) const {
    const auto& tri = triangles[t];
    Mat2 J;
    J.col(0) = vertices[tri[1]] - vertices[tri[0]];
    J.col(1) = vertices[tri[2]] - vertices[tri[0]];
    return J;
}

Vec2 Mesh::tri_point(int t, double xi, double eta) const {
    const auto& tri = triangles[t];
    return vertices[tri[0]] * (1.0 - xi - eta) + vertices[tri[1]] * xi +
           vertices[tri[2]] * eta;
}

namespace {

double max_diameter(const Mesh& m) {
    double h = 0.0;
    for (const auto& tri : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            double len = (m.vertices[tri[e]] - m.vertices[tri[(e + 1) % 3]]).norm();
            h = std::max(h, len);
        }
    }
    return h;
}

} // namespace

Mesh build_structured(int nx, int ny, double x0, double y0, double x1, double y1) {
    if (nx < 1 || ny < 1)
        throw ConfigError("mesh subdivisions must be positive, got nx=" +
                          std::to_string(nx) + " ny=" + std::to_string(ny));
    if (!(x1 > x0) || !(y1 > y0))
        throw ConfigError("mesh domain must have positive width and height");

    Mesh m;
    const double hx = (x1 - x0) / nx;
    const double hy = (y1 - y0) / ny;
    m.vertices.reserve((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.emplace_back(x0 + i * hx, y0 + j * hy);

    auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
    m.triangles.reserve(2 * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            int v00 = vid(i, j), v10 = vid(i + 1, j);
            int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            m.triangles.push_back({v00, v10, v11});
            m.triangles.push_back({v00, v11, v01});
        }
    }

    for (int i = 0; i < nx; ++i)
        m.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), 1, Vec2(0, -1)});
    for (int j = 0; j < ny; ++j)
        m.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), 2, Vec2(1, 0)});
    for (int i = 0; i < nx; ++i)
        m.boundary_edges.push_back({vid(i, ny), vid(i + 1, ny), 3, Vec2(0, 1)});
    for (int j = 0; j < ny; ++j)
        m.boundary_edges.push_back({vid(0, j), vid(0, j + 1), 4, Vec2(-1, 0)});

    m.h = max_diameter(m);
    return m;
}

Mesh refine_uniform(const Mesh& in) {
    Mesh m;
    m.vertices = in.vertices;

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        int id = m.n_vertices();
        m.vertices.push_back(0.5 * (in.vertices[a] + in.vertices[b]));
        midpoint.emplace(key, id);
        return id;
    };

    m.triangles.reserve(4 * in.triangles.size());
    for (const auto& tri : in.triangles) {
        int a = tri[0], b = tri[1], c = tri[2];
        int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        m.triangles.push_back({a, ab, ca});
        m.triangles.push_back({ab, b, bc});
        m.triangles.push_back({ca, bc, c});
        m.triangles.push_back({ab, bc, ca});
    }

    m.boundary_edges.reserve(2 * in.boundary_edges.size());
    for (const auto& e : in.boundary_edges) {
        int mm = mid(e.v0, e.v1);
        m.boundary_edges.push_back({e.v0, mm, e.tag, e.normal});
        m.boundary_edges.push_back({mm, e.v1, e.tag, e.normal});
    }

    m.h = max_diameter(m);
    return m;
}

std::string dump_mesh(const Mesh& m) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& v : m.vertices) os << "v " << v.x() << " " << v.y() << "\n";
    for (const auto& t : m.triangles)
        os << "t " << t[0] << " " << t[1] << " " << t[2] << "\n";
    for (const auto& e : m.boundary_edges)
        os << "b " << e.v0 << " " << e.v1 << " " << e.tag << "\n";
    return os.str();
}

} // namespace tpe
