#include "quadrature.hpp"

#include "errors.hpp"

namespace tpe {

// Conical-product Gauss rules on the reference triangle (Duffy transform of a
// tensor Gauss-Legendre x Gauss-Jacobi(1,0) grid). An n x n rule integrates
// total degree 2n-1 exactly. All weights positive.
namespace {

const QuadPoint kConical1[] = {
    {0.33333333333333331, 0.33333333333333337, 0.5}};

const QuadPoint kConical2[] = {
    {0.17855872826361643, 0.15505102572168217, 0.15902069087198858},
    {0.075031110222608111, 0.64494897427831788, 0.090979309128011415},
    {0.66639024601470143, 0.15505102572168217, 0.15902069087198858},
    {0.28001991549907401, 0.64494897427831788, 0.090979309128011415}};

const QuadPoint kConical3[] = {
    {0.10271765480962626, 0.088587959512703929, 0.055814420483044358},
    {0.066554067839164496, 0.40946686444073477, 0.063678085099885082},
    {0.02393113228708062, 0.787659461760847, 0.0193963833059595},
    {0.45570602024364804, 0.088587959512703929, 0.089303072772870876},
    {0.29526656777963262, 0.40946686444073477, 0.10188493615981602},
    {0.1061702691195765, 0.787659461760847, 0.031034213289535168},
    {0.80869438567766982, 0.088587959512703929, 0.055814420483044358},
    {0.52397906772010072, 0.40946686444073477, 0.063678085099885082},
    {0.18840940595207237, 0.787659461760847, 0.0193963833059595}};

const QuadPoint kConical4[] = {
    {0.065466994555014452, 0.057104196114517725, 0.0235683681933824},
    {0.050210123211369778, 0.2768430136381238, 0.035388067898085893},
    {0.028912084224389012, 0.58359043236891683, 0.022584049282369907},
    {0.0097037851269461094, 0.86024013565621948, 0.0054232259105252536},
    {0.31116455224435702, 0.057104196114517725, 0.044185088522361859},
    {0.23864865973144292, 0.2768430136381238, 0.066344216107049658},
    {0.13741910413457437, 0.58359043236891683, 0.04233972452174626},
    {0.046122079906452035, 0.86024013565621948, 0.010167259564478788},
    {0.6317312516411252, 0.057104196114517725, 0.044185088522361859},
    {0.48450832663043325, 0.2768430136381238, 0.066344216107049658},
    {0.2789904634965088, 0.58359043236891683, 0.04233972452174626},
    {0.093637784437328481, 0.86024013565621948, 0.010167259564478788},
    {0.87742880933046774, 0.057104196114517725, 0.0235683681933824},
    {0.67294686315050634, 0.2768430136381238, 0.035388067898085893},
    {0.38749748340669415, 0.58359043236891683, 0.022584049282369907},
    {0.1300560792168344, 0.86024013565621948, 0.0054232259105252536}};

const QuadPoint kConical5[] = {
    {0.045042593569803738, 0.039809857051468722, 0.011465080351592518},
    {0.037621252345111204, 0.19801341787360821, 0.019804083132047359},
    {0.026364644944470925, 0.43797481024738616, 0.017341506431365696},
    {0.014285794395571387, 0.69546427335363614, 0.0087554991821638291},
    {0.0046222884650464298, 0.90146491420117358, 0.0018655521668778402},
    {0.22157860955237921, 0.039809857051468722, 0.023161221929498342},
    {0.18507071026738944, 0.19801341787360821, 0.04000728738616046},
    {0.12969593678225411, 0.43797481024738616, 0.035032504503371732},
    {0.070276292008281713, 0.69546427335363614, 0.017687452110483469},
    {0.022738483063764033, 0.90146491420117358, 0.0037687016953276264},
    {0.48009507147426567, 0.039809857051468722, 0.027528985664469759},
    {0.40099329106319592, 0.19801341787360821, 0.047551897057954054},
    {0.28101259487630692, 0.43797481024738616, 0.041638965215194987},
    {0.15226786332318193, 0.69546427335363614, 0.021022967487322082},
    {0.049267542899413208, 0.90146491420117358, 0.0044794067972813659},
    {0.73861153339615204, 0.039809857051468722, 0.023161221929498342},
    {0.61691587185900232, 0.19801341787360821, 0.04000728738616046},
    {0.43232925297035968, 0.43797481024738616, 0.035032504503371732},
    {0.23425943463808213, 0.69546427335363614, 0.017687452110483469},
    {0.075796602735062377, 0.90146491420117358, 0.0037687016953276264},
    {0.91514754937872755, 0.039809857051468722, 0.011465080351592518},
    {0.76436532978128058, 0.19801341787360821, 0.019804083132047359},
    {0.53566054480814285, 0.43797481024738616, 0.017341506431365696},
    {0.29024993225079243, 0.69546427335363614, 0.0087554991821638291},
    {0.093912797333779982, 0.90146491420117358, 0.0018655521668778402}};

const EdgeQuadPoint kGauss1[] = {{0.5, 1}};
const EdgeQuadPoint kGauss2[] = {
    {0.21132486540518713, 0.5}, {0.78867513459481287, 0.5}};
const EdgeQuadPoint kGauss3[] = {
    {0.1127016653792583, 0.2777777777777779},
    {0.5, 0.44444444444444414},
    {0.8872983346207417, 0.2777777777777779}};
const EdgeQuadPoint kGauss4[] = {
    {0.069431844202973714, 0.1739274225687269},
    {0.33000947820757187, 0.3260725774312731},
    {0.66999052179242813, 0.3260725774312731},
    {0.93056815579702623, 0.1739274225687269}};
const EdgeQuadPoint kGauss5[] = {
    {0.046910077030668018, 0.11846344252809449},
    {0.23076534494715845, 0.23931433524968326},
    {0.5, 0.2844444444444445},
    {0.7692346550528415, 0.23931433524968326},
    {0.95308992296933193, 0.11846344252809449}};

} // namespace

std::span<const QuadPoint> triangle_rule(int degree) {
    switch (degree) {
    case 1: return kConical1;
    case 2:
    case 3: return kConical2;
    case 4:
    case 5: return kConical3;
    case 6:
    case 7: return kConical4;
    case 8: return kConical5;
    default:
        throw ConfigError("triangle quadrature degree must be in [1,8], got " +
                          std::to_string(degree));
    }
}

std::span<const EdgeQuadPoint> edge_rule(int degree) {
    if (degree <= 1) return kGauss1;
    if (degree <= 3) return kGauss2;
    if (degree <= 5) return kGauss3;
    if (degree <= 7) return kGauss4;
    if (degree <= 9) return kGauss5;
    throw ConfigError("edge quadrature degree must be in [1,9], got " +
                      std::to_string(degree));
}

} // namespace tpe
