#pragma once

#include <stdexcept>
#include <string>

namespace gridforge {

// Root of every library error. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PoleEvaluation : public Error { public: using Error::Error; };
class DegenerateLoop : public Error { public: using Error::Error; };
class NoCrossover : public Error { public: using Error::Error; };
class ImproperTF : public Error { public: using Error::Error; };
class NonFinite : public Error { public: using Error::Error; };
class SingularAtDC : public Error { public: using Error::Error; };
class Infeasible : public Error { public: using Error::Error; };
class AssumptionViolated : public Error { public: using Error::Error; };
class SingularLoop : public Error { public: using Error::Error; };
class NoVoltageSolution : public Error { public: using Error::Error; };
class InsufficientWindow : public Error { public: using Error::Error; };

// Carries the dotted path of the offending field, e.g. "inverters[1].line.R".
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string& what);
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace gridforge
