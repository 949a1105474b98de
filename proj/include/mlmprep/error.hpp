#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mlmprep {

// Base for every data error raised by the library. The CLI maps these to
// exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MalformedRecord : public Error {
public:
  MalformedRecord(std::size_t line_number, const std::string& why)
      : Error("malformed record at line " + std::to_string(line_number) + ": " + why),
        line_number_(line_number) {}

  std::size_t line_number() const noexcept { return line_number_; }

private:
  std::size_t line_number_;
};

class DuplicateId : public Error {
public:
  explicit DuplicateId(std::string id) : Error("duplicate document id: " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

private:
  std::string id_;
};

#define MLMPREP_SIMPLE_ERROR(Name)          \
  class Name : public Error {               \
  public:                                   \
    using Error::Error;                     \
  }

MLMPREP_SIMPLE_ERROR(InsufficientDocuments);
MLMPREP_SIMPLE_ERROR(EmptyText);
MLMPREP_SIMPLE_ERROR(NoProfiles);
MLMPREP_SIMPLE_ERROR(TokenizerFailure);
MLMPREP_SIMPLE_ERROR(VocabularyTooSmall);
MLMPREP_SIMPLE_ERROR(StepOutOfRange);
MLMPREP_SIMPLE_ERROR(EmptyPredictions);
MLMPREP_SIMPLE_ERROR(UnknownLabel);
MLMPREP_SIMPLE_ERROR(InsufficientPoints);
MLMPREP_SIMPLE_ERROR(DuplicateModelName);
MLMPREP_SIMPLE_ERROR(InvalidConfig);
MLMPREP_SIMPLE_ERROR(ManifestError);

#undef MLMPREP_SIMPLE_ERROR

}  // namespace mlmprep
