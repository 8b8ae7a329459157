#pragma once

#include <stdexcept>
#include <string>

namespace wasserdoc {

// Every library failure derives from Error. type() is the stable tag used in
// the CLI's machine-readable error object.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* type() const noexcept { return "error"; }
};

#define WASSERDOC_DEFINE_ERROR(Name, tag)                          \
  class Name : public Error {                                      \
   public:                                                         \
    using Error::Error;                                            \
    const char* type() const noexcept override { return tag; }     \
  }

WASSERDOC_DEFINE_ERROR(DimensionError, "dimension_error");
WASSERDOC_DEFINE_ERROR(InputError, "input_error");
WASSERDOC_DEFINE_ERROR(NumericalError, "numerical_error");
WASSERDOC_DEFINE_ERROR(LookupError, "lookup_error");
WASSERDOC_DEFINE_ERROR(EmptyDocumentError, "empty_document_error");
WASSERDOC_DEFINE_ERROR(DegenerateVectorError, "degenerate_vector_error");
WASSERDOC_DEFINE_ERROR(FormatError, "format_error");
WASSERDOC_DEFINE_ERROR(ClassificationError, "classification_error");
WASSERDOC_DEFINE_ERROR(ContractError, "internal_contract_error");

#undef WASSERDOC_DEFINE_ERROR

}  // namespace wasserdoc
