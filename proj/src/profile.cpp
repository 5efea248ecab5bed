#include "torcan/profile.hpp"

#include <cmath>
#include <string>

namespace torcan::family {

void LambdaProfile::add_plateau(const Plateau& p) {
    if (flat_) throw ConstructionError("bump: constant profiles take no plateaus");
    if (!(p.lo < p.hi)) throw ConstructionError("bump: empty segment");
    if (!(p.shoulder > 0.0)) throw ConstructionError("bump: shoulder must be positive");
    if (p.outer_lo() <= e_lo_ || p.outer_hi() >= e_hi_) {
        throw ConstructionError("bump: plateau shoulders leave the extended core");
    }
    for (const auto& q : plateaus_) {
        if (p.outer_lo() < q.outer_hi() && q.outer_lo() < p.outer_hi()) {
            throw ConstructionError("bump: plateau overlaps an existing one");
        }
    }
    plateaus_.push_back(p);
    std::sort(plateaus_.begin(), plateaus_.end(),
              [](const Plateau& u, const Plateau& v) { return u.lo < v.lo; });
}

LambdaProfile bump(const LambdaProfile& profile, double lo, double hi, double excess_I,
                   double gamma, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConstructionError("bump: Delta must be in (0,1)");
    if (!(excess_I > 0.0)) throw ConstructionError("bump: I must be positive");
    if (!(gamma > 0.0)) throw ConstructionError("bump: gamma must be positive");
    if (!(lo > -1.0 && hi < 1.0 && lo < hi)) {
        throw ConstructionError("bump: segment must lie inside (-1, 1)");
    }
    const double len = hi - lo;
    const double magnitude = (excess_I + gamma) / len;
    const double delta0 = len * delta / (excess_I + gamma);

    Plateau p;
    p.lo = lo;
    p.hi = hi;
    p.value = profile.sign() * magnitude;
    p.shoulder = 0.5 * delta0;

    LambdaProfile out = profile;
    out.add_plateau(p);
    return out;
}

} // namespace torcan::family
