#include "torcan/flow.hpp"

#include <iomanip>
#include <sstream>

namespace torcan::flow {

// CSV dump of recorded orbit samples (columns y, x, L).
std::string orbit_csv(const std::vector<OrbitSample>& samples) {
    std::ostringstream out;
    out << "y,x,L\n" << std::setprecision(17);
    for (const auto& s : samples) {
        out << s.y << ',' << geom::wrap_angle(s.x) << ',' << s.L << '\n';
    }
    return out.str();
}

} // namespace torcan::flow
