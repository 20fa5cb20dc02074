#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace queuetion {

// Error families map onto the CLI exit-code contract:
// 2 = malformed input, 3 = semantic validation, 4 = internal cross-check
// disagreement, 5 = size limit.
enum class errc { parse = 2, validation = 3, inconsistency = 4, size_limit = 5 };

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(errc::parse, m) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error(errc::validation, m) {}
};

struct NonPositiveParameter : ValidationError {
  explicit NonPositiveParameter(const std::string& m) : ValidationError(m) {}
};
struct NonFiniteParameter : ValidationError {
  explicit NonFiniteParameter(const std::string& m) : ValidationError(m) {}
};
struct DuplicateId : ValidationError {
  explicit DuplicateId(const std::string& m) : ValidationError(m) {}
};
struct EmptyInstance : ValidationError {
  explicit EmptyInstance(const std::string& m) : ValidationError(m) {}
};
struct PositionOutOfRange : ValidationError {
  explicit PositionOutOfRange(const std::string& m) : ValidationError(m) {}
};
struct BidCountMismatch : ValidationError {
  explicit BidCountMismatch(const std::string& m) : ValidationError(m) {}
};
struct UnknownParticipant : ValidationError {
  explicit UnknownParticipant(const std::string& m) : ValidationError(m) {}
};

struct InternalInconsistency : Error {
  explicit InternalInconsistency(const std::string& m) : Error(errc::inconsistency, m) {}
};

struct SizeLimitExceeded : Error {
  explicit SizeLimitExceeded(const std::string& m) : Error(errc::size_limit, m) {}
};
struct OracleLimitExceeded : SizeLimitExceeded {
  explicit OracleLimitExceeded(const std::string& m) : SizeLimitExceeded(m) {}
};

}  // namespace queuetion
