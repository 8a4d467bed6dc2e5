#include "gridforge/errors.hpp"

namespace gridforge {

ValidationError::ValidationError(std::string path, const std::string& what)
    : Error(path + ": " + what), path_(std::move(path)) {}

}  // namespace gridforge
