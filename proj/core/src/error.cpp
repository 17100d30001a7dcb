#include "trajtree/error.hpp"

namespace trajtree {

InputError::InputError(std::size_t line, const std::string& what)
    : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace trajtree
