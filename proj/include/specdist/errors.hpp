#pragma once

#include <stdexcept>
#include <string>

namespace specdist {

/// Base of every library error; name() is the stable type tag used by the CLI.
class Error : public std::runtime_error {
public:
  Error(const char *name, const std::string &what)
      : std::runtime_error(what), name_(name) {}
  const char *name() const noexcept { return name_; }

private:
  const char *name_;
};

#define SPECDIST_ERROR(Type)                                                   \
  class Type : public Error {                                                  \
  public:                                                                      \
    explicit Type(const std::string &what) : Error(#Type, what) {}             \
  }

SPECDIST_ERROR(DimensionMismatch);
SPECDIST_ERROR(SingularC1);
SPECDIST_ERROR(NonFinite);
SPECDIST_ERROR(PoleHit);
SPECDIST_ERROR(BracketFailure);
SPECDIST_ERROR(DomainError);
SPECDIST_ERROR(CaseError);
SPECDIST_ERROR(NonPositiveEigenvalue);
SPECDIST_ERROR(ContourThroughPole);
SPECDIST_ERROR(FactorizationFailure);

#undef SPECDIST_ERROR

} // namespace specdist
