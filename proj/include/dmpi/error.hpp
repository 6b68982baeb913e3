#ifndef DMPI_ERROR_HPP
#define DMPI_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace dmpi {

// Library errors carry a short machine-readable code ("EmptySample",
// "ShapeMismatch", ...) plus a human-readable detail string.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

} // namespace dmpi

#endif
