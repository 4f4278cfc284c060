#pragma once

#include <stdexcept>
#include <string>

namespace affdim {

// Base of every error thrown by the library. The `code` is a stable
// identifier (used by the CLI for exit-status mapping and messages).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define AFFDIM_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

AFFDIM_DEFINE_ERROR(SingularMatrix);
AFFDIM_DEFINE_ERROR(NonContracting);
AFFDIM_DEFINE_ERROR(DomainError);
AFFDIM_DEFINE_ERROR(DepthExceedsWord);
AFFDIM_DEFINE_ERROR(WordTooShort);
AFFDIM_DEFINE_ERROR(BudgetExceeded);
AFFDIM_DEFINE_ERROR(MassNotNormalized);
AFFDIM_DEFINE_ERROR(DepthInsufficientForGrid);
AFFDIM_DEFINE_ERROR(GridTooFine);
AFFDIM_DEFINE_ERROR(EmptyBall);
AFFDIM_DEFINE_ERROR(DegenerateFrame);
AFFDIM_DEFINE_ERROR(ConfigInvalid);

#undef AFFDIM_DEFINE_ERROR

}  // namespace affdim
