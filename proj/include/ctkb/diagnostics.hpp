#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ctkb {

struct SourceLoc {
  int line = 0;
  int col = 0;

  // Locations never take part in structural equality of syntax trees.
  friend bool operator==(const SourceLoc&, const SourceLoc&) { return true; }
};

enum class Severity { Error, Warning, Note };

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Note: return "note";
  }
  return "error";
}

struct Diagnostic {
  std::string file;
  SourceLoc loc;
  Severity severity = Severity::Error;
  std::string message;

  // `file:line:col: severity: message`
  std::string format() const {
    std::ostringstream os;
    os << (file.empty() ? "<input>" : file) << ':' << loc.line << ':' << loc.col << ": "
       << to_string(severity) << ": " << message;
    return os.str();
  }
};

enum class ErrorKind {
  Parse,
  Validation,
  Cycle,
  NotAllowed,
  DepthExceeded,
  Bounds,
  Quantification,
  Consistency,
  Combine,
  ImpossibleEvidence,
  EnumerationGuard,
  Sampling,
  EncodingMismatch,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Cycle: return "cycle";
    case ErrorKind::NotAllowed: return "not-allowed";
    case ErrorKind::DepthExceeded: return "depth-exceeded";
    case ErrorKind::Bounds: return "bounds";
    case ErrorKind::Quantification: return "quantification";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Combine: return "combine";
    case ErrorKind::ImpossibleEvidence: return "impossible-evidence";
    case ErrorKind::EnumerationGuard: return "enumeration-guard";
    case ErrorKind::Sampling: return "sampling";
    case ErrorKind::EncodingMismatch: return "encoding-mismatch";
  }
  return "unknown";
}

/// Every failure in the engine surfaces as an Error carrying its kind and,
/// where a source position is known, one or more diagnostics.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::vector<Diagnostic> diagnostics = {})
      : std::runtime_error(std::move(message)), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  /// Message taken from the first diagnostic.
  Error(ErrorKind kind, std::vector<Diagnostic> diagnostics)
      : std::runtime_error(diagnostics.empty() ? std::string(to_string(kind))
                                               : diagnostics.front().format()),
        kind_(kind),
        diagnostics_(std::move(diagnostics)) {}

  ErrorKind kind() const { return kind_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

  std::string report() const {
    if (diagnostics_.empty()) return std::string(to_string(kind_)) + ": " + what();
    std::string out;
    for (const auto& d : diagnostics_) {
      if (!out.empty()) out += '\n';
      out += d.format();
    }
    return out;
  }

 private:
  ErrorKind kind_;
  std::vector<Diagnostic> diagnostics_;
};

}  // namespace ctkb
