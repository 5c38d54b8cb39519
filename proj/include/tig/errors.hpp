#pragma once

#include <stdexcept>
#include <string>

namespace tig {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// geometry
class PointInsideObstacle : public Error { public: using Error::Error; };
class NoIntersection : public Error { public: using Error::Error; };
class InvalidClamp : public Error { public: using Error::Error; };

// world
class GenerationFailed : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };

// planners
class ExpansionOverflow : public Error { public: using Error::Error; };
class StartOrTargetBlocked : public Error { public: using Error::Error; };
class InternalError : public Error { public: using Error::Error; };

// metrics
class DegenerateVertex : public Error { public: using Error::Error; };

} // namespace tig
