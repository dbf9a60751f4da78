#ifndef LETHE_UTIL_STATUS_H_
#define LETHE_UTIL_STATUS_H_

#include <string>
#include <utility>

namespace lethe {

// Operation result carrying an error class and a human-readable message.
class Status {
 public:
  enum Code {
    kOk = 0,
    kNotFound,
    kCorruption,
    kIOError,
    kInvalidArgument,
    kOverflow,
    kEmptyTree,
    kUnsortedInput,
  };

  Status() : code_(kOk) {}

  static Status OK() { return Status(); }
  static Status NotFound(std::string msg = "") {
    return Status(kNotFound, std::move(msg));
  }
  static Status Corruption(std::string msg = "") {
    return Status(kCorruption, std::move(msg));
  }
  static Status IOError(std::string msg = "") {
    return Status(kIOError, std::move(msg));
  }
  static Status InvalidArgument(std::string msg = "") {
    return Status(kInvalidArgument, std::move(msg));
  }
  static Status Overflow(std::string msg = "") {
    return Status(kOverflow, std::move(msg));
  }
  static Status EmptyTree(std::string msg = "") {
    return Status(kEmptyTree, std::move(msg));
  }
  static Status UnsortedInput(std::string msg = "") {
    return Status(kUnsortedInput, std::move(msg));
  }

  bool ok() const { return code_ == kOk; }
  bool IsNotFound() const { return code_ == kNotFound; }
  bool IsCorruption() const { return code_ == kCorruption; }
  bool IsIOError() const { return code_ == kIOError; }
  bool IsInvalidArgument() const { return code_ == kInvalidArgument; }
  bool IsOverflow() const { return code_ == kOverflow; }
  bool IsEmptyTree() const { return code_ == kEmptyTree; }
  bool IsUnsortedInput() const { return code_ == kUnsortedInput; }

  Code code() const { return code_; }

  std::string ToString() const {
    if (ok()) return "OK";
    const char* name = "unknown";
    switch (code_) {
      case kNotFound: name = "NotFound"; break;
      case kCorruption: name = "Corruption"; break;
      case kIOError: name = "IOError"; break;
      case kInvalidArgument: name = "InvalidArgument"; break;
      case kOverflow: name = "Overflow"; break;
      case kEmptyTree: name = "EmptyTree"; break;
      case kUnsortedInput: name = "UnsortedInput"; break;
      default: break;
    }
    if (msg_.empty()) return name;
    return std::string(name) + ": " + msg_;
  }

 private:
  Status(Code code, std::string msg) : code_(code), msg_(std::move(msg)) {}

  Code code_;
  std::string msg_;
};

}  // namespace lethe

#endif  // LETHE_UTIL_STATUS_H_
