#pragma once

#include <stdexcept>
#include <string>

namespace rcr::detail {

inline void require_arg(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_state(bool cond, const std::string& msg) {
    if (!cond) throw std::logic_error(msg);
}

}  // namespace rcr::detail
