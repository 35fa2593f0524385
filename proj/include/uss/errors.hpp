#pragma once

#include <stdexcept>
#include <string>

namespace uss {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for inputs that are rejected before any protocol run starts.
class ValidationError : public Error {
 public:
  using Error::Error;
};

#define USS_DEFINE_ERROR(Name, Base)          \
  class Name : public Base {                  \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Base(std::string(#Name ": ") + what) {} \
  }

// params
USS_DEFINE_ERROR(DivisibilityError, ValidationError);
USS_DEFINE_ERROR(LevelBudgetError, ValidationError);
USS_DEFINE_ERROR(ThresholdOrderError, ValidationError);
USS_DEFINE_ERROR(MissingLevelError, ValidationError);
USS_DEFINE_ERROR(LevelOutOfRange, ValidationError);
USS_DEFINE_ERROR(FractionFormatError, ValidationError);
USS_DEFINE_ERROR(ConfigError, ValidationError);

// keystore
USS_DEFINE_ERROR(InsufficientKeyFileError, ValidationError);
USS_DEFINE_ERROR(KeyFileFormatError, ValidationError);
USS_DEFINE_ERROR(KeyExhaustedError, Error);
USS_DEFINE_ERROR(AuthFailure, Error);

// protocol
USS_DEFINE_ERROR(UnknownMessage, ValidationError);
USS_DEFINE_ERROR(ReusedMessage, ValidationError);
USS_DEFINE_ERROR(SnapshotFormatError, ValidationError);

// framework / adversary
USS_DEFINE_ERROR(CoalitionRoleError, ValidationError);
USS_DEFINE_ERROR(CoalitionTooLarge, ValidationError);
USS_DEFINE_ERROR(RoleError, ValidationError);
USS_DEFINE_ERROR(LevelOrderError, ValidationError);
USS_DEFINE_ERROR(InstanceTooLarge, ValidationError);

// analysis
USS_DEFINE_ERROR(ThresholdRangeError, ValidationError);
USS_DEFINE_ERROR(ScenarioError, ValidationError);

#undef USS_DEFINE_ERROR

}  // namespace uss
