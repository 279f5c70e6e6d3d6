#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linggen {

enum class ErrorKind {
  kEmptyDocument,
  kUnknownAttributeId,
  kInsufficientData,
  kLengthMismatch,
  kDomain,
  kNoRoot,
  kShapeMismatch,
  kSequenceTooLong,
  kEmptyBatch,
  kEmptySplit,
  kTrainingDiverged,
  kEmptyCorpus,
  kSchemaMismatch,
  kConfig,
  kIo,
  kFormat,
  kNetwork,
  kMissingCredential,
};

constexpr std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyDocument: return "EmptyDocument";
    case ErrorKind::kUnknownAttributeId: return "UnknownAttributeId";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDomain: return "DomainError";
    case ErrorKind::kNoRoot: return "NoRoot";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kSequenceTooLong: return "SequenceTooLong";
    case ErrorKind::kEmptyBatch: return "EmptyBatch";
    case ErrorKind::kEmptySplit: return "EmptySplit";
    case ErrorKind::kTrainingDiverged: return "TrainingDiverged";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kSchemaMismatch: return "SchemaMismatch";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kNetwork: return "NetworkError";
    case ErrorKind::kMissingCredential: return "MissingCredential";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view category() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace linggen
