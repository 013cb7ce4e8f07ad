#pragma once

#include <stdexcept>
#include <string>

namespace rsdlab {

enum class ErrorCode {
  DuplicateSchoolInList,
  SchoolIndexOutOfRange,
  ZeroCapacity,
  MoreSchoolsThanStudents,
  SpecInvalid,
  InstanceTooLarge,
  NotBindingSchool,
  BadPermutation,
  FileNotFound,
  BadConfig,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateSchoolInList: return "DuplicateSchoolInList";
    case ErrorCode::SchoolIndexOutOfRange: return "SchoolIndexOutOfRange";
    case ErrorCode::ZeroCapacity: return "ZeroCapacity";
    case ErrorCode::MoreSchoolsThanStudents: return "MoreSchoolsThanStudents";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NotBindingSchool: return "NotBindingSchool";
    case ErrorCode::BadPermutation: return "BadPermutation";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "UnknownError";
}

// Library errors carry a stable machine-readable code; the CLI maps codes to
// exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace rsdlab
