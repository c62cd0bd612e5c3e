#pragma once
// Error taxonomy. Each subsystem throws a named subclass of Error so callers
// (and the HTTP layer) can map failures to stable codes.

#include <stdexcept>
#include <string>

namespace seqdiscover {

class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(msg), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define SEQDISCOVER_DEFINE_ERROR(Name, code_str)              \
  class Name : public Error {                                 \
   public:                                                    \
    explicit Name(const std::string& msg)                     \
        : Error(code_str, std::string(code_str) + ": " + msg) {} \
  }

// corpus
SEQDISCOVER_DEFINE_ERROR(MissingColumn, "missing_column");
SEQDISCOVER_DEFINE_ERROR(BadSymbol, "bad_symbol");
SEQDISCOVER_DEFINE_ERROR(DuplicateId, "duplicate_id");
SEQDISCOVER_DEFINE_ERROR(LengthMismatch, "length_mismatch");
SEQDISCOVER_DEFINE_ERROR(NTestTooLarge, "n_test_too_large");
SEQDISCOVER_DEFINE_ERROR(AlreadyLabeled, "already_labeled");
SEQDISCOVER_DEFINE_ERROR(UnknownId, "unknown_id");
SEQDISCOVER_DEFINE_ERROR(InvalidSpec, "invalid_spec");
SEQDISCOVER_DEFINE_ERROR(ParseError, "parse_error");

// encoder
SEQDISCOVER_DEFINE_ERROR(MissingEmbedding, "missing_embedding");
SEQDISCOVER_DEFINE_ERROR(DimMismatch, "dim_mismatch");
SEQDISCOVER_DEFINE_ERROR(RaggedRows, "ragged_rows");

// bnn
SEQDISCOVER_DEFINE_ERROR(BadArch, "bad_arch");
SEQDISCOVER_DEFINE_ERROR(EmptyBatch, "empty_batch");

// uncertainty
SEQDISCOVER_DEFINE_ERROR(OutOfRange, "out_of_range");
SEQDISCOVER_DEFINE_ERROR(TooFewSamples, "too_few_samples");

// scoring
SEQDISCOVER_DEFINE_ERROR(NegativeUncertainty, "negative_uncertainty");
SEQDISCOVER_DEFINE_ERROR(KTooLarge, "k_too_large");

// policy / expert
SEQDISCOVER_DEFINE_ERROR(BudgetExceedsPool, "budget_exceeds_pool");
SEQDISCOVER_DEFINE_ERROR(BudgetExceedsUnion, "budget_exceeds_union");

// engine / service
SEQDISCOVER_DEFINE_ERROR(ConfigInvalid, "config_invalid");
SEQDISCOVER_DEFINE_ERROR(PoolExhausted, "pool_exhausted");
SEQDISCOVER_DEFINE_ERROR(EmptyHoldout, "empty_holdout");
SEQDISCOVER_DEFINE_ERROR(WrongPhase, "wrong_phase");
SEQDISCOVER_DEFINE_ERROR(BadSelection, "bad_selection");
SEQDISCOVER_DEFINE_ERROR(SessionNotFound, "session_not_found");

#undef SEQDISCOVER_DEFINE_ERROR

}  // namespace seqdiscover
