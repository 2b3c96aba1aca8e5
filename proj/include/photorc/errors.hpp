#pragma once

#include <stdexcept>
#include <string>

namespace photorc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class ResourceError : public Error { public: using Error::Error; };
class CalibrationError : public Error { public: using Error::Error; };
class AllocationError : public Error { public: using Error::Error; };
class IllConditioned : public Error { public: using Error::Error; };
class ProtocolError : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class StateError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace photorc
