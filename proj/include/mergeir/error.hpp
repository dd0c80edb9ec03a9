#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace mergeir {

/// All failures surface as this exception type with a human-readable message.
class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void msg_append(std::ostringstream&) {}

template <typename T, typename... Rest>
void msg_append(std::ostringstream& os, const T& head, const Rest&... rest) {
    os << head;
    msg_append(os, rest...);
}

}  // namespace detail

template <typename... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    std::ostringstream os;
    detail::msg_append(os, parts...);
    throw error(os.str());
}

template <typename... Parts>
void require(bool cond, const Parts&... parts) {
    if (!cond) {
        fail(parts...);
    }
}

}  // namespace mergeir
