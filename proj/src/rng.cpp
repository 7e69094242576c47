#include "agentlab/rng.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace agentlab {

std::string Rng::state_string() const {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%llx:%llx:%llx:%llx:%d:%a",
                  (unsigned long long)s_[0], (unsigned long long)s_[1],
                  (unsigned long long)s_[2], (unsigned long long)s_[3],
                  has_spare_ ? 1 : 0, spare_);
    return buf;
}

void Rng::set_state(const std::string& st) {
    unsigned long long a, b, c, d;
    int sp;
    double spare;
    if (std::sscanf(st.c_str(), "%llx:%llx:%llx:%llx:%d:%la", &a, &b, &c, &d, &sp, &spare) != 6)
        throw std::runtime_error("Rng::set_state: malformed state string '" + st + "'");
    s_[0] = a; s_[1] = b; s_[2] = c; s_[3] = d;
    has_spare_ = sp != 0;
    spare_ = spare;
}

}  // namespace agentlab
