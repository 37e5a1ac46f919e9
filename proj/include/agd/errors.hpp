#pragma once

#include <stdexcept>
#include <string>

namespace agd {

/// Base class for every error raised by the detection engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyStudyArea : public Error { public: using Error::Error; };
class InfeasiblePrism : public Error { public: using Error::Error; };
class NonPositiveDuration : public Error { public: using Error::Error; };
class SchemaError : public Error { public: using Error::Error; };
class EmptyInput : public Error { public: using Error::Error; };
class EmptyIndex : public Error { public: using Error::Error; };
class DuplicateEntry : public Error { public: using Error::Error; };
class InsufficientHistory : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class LabelSetMismatch : public Error { public: using Error::Error; };
class FormatError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };
class EmptyGapSet : public Error { public: using Error::Error; };

}  // namespace agd
