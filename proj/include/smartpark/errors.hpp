#pragma once

#include <stdexcept>
#include <string>

namespace smartpark {

/// Root of every error thrown by the library. `kind()` is a stable short tag
/// used in CLI output and HTTP error payloads.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define SMARTPARK_DEFINE_ERROR(Name, Tag)                                     \
  class Name : public Error {                                                 \
  public:                                                                     \
    explicit Name(const std::string& what) : Error(Tag, what) {}              \
  }

SMARTPARK_DEFINE_ERROR(ConfigError, "configuration");
SMARTPARK_DEFINE_ERROR(RangeError, "range");
SMARTPARK_DEFINE_ERROR(DomainError, "domain");
SMARTPARK_DEFINE_ERROR(LookupError, "lookup");
SMARTPARK_DEFINE_ERROR(ParseError, "parse");

// wire codec
SMARTPARK_DEFINE_ERROR(EncodingError, "encoding");
SMARTPARK_DEFINE_ERROR(TruncationError, "truncation");
SMARTPARK_DEFINE_ERROR(IntegrityError, "integrity");

// ingestion
SMARTPARK_DEFINE_ERROR(LateDataError, "late-data");

// analytics / optimization
SMARTPARK_DEFINE_ERROR(FitError, "fit");
SMARTPARK_DEFINE_ERROR(EmptySeriesError, "empty-series");
SMARTPARK_DEFINE_ERROR(NoThresholdError, "no-threshold");
SMARTPARK_DEFINE_ERROR(UndefinedRateError, "undefined-rate");
SMARTPARK_DEFINE_ERROR(InfeasibleError, "infeasible");
SMARTPARK_DEFINE_ERROR(SingularityError, "singularity");
SMARTPARK_DEFINE_ERROR(EvaluationError, "evaluation");

// service
SMARTPARK_DEFINE_ERROR(UnavailableError, "service-unavailable");

#undef SMARTPARK_DEFINE_ERROR

}  // namespace smartpark
