#include "homog/corrector.hpp"

namespace homog {

double CutoffPair::plus(double y1) const {
    if (y1 <= 0.0) return 0.0;
    if (y1 >= 1.0) return 1.0;
    return y1 * y1 * y1 * (10.0 + y1 * (-15.0 + 6.0 * y1));
}

double CutoffPair::dplus(double y1) const {
    if (y1 <= 0.0 || y1 >= 1.0) return 0.0;
    const double t = y1 * (1.0 - y1);
    return 30.0 * t * t;
}

double CutoffPair::ddplus(double y1) const {
    if (y1 <= 0.0 || y1 >= 1.0) return 0.0;
    return 60.0 * y1 * (1.0 - y1) * (1.0 - 2.0 * y1);
}

CutoffPair make_cutoffs() { return {}; }

}  // namespace homog
