#pragma once

#include <stdexcept>
#include <string>

namespace expmix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define EXPMIX_DEFINE_ERROR(Name)                              \
  struct Name final : Error {                                  \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

EXPMIX_DEFINE_ERROR(OrbitHitsBoundary);
EXPMIX_DEFINE_ERROR(TruncationTailTooLarge);
EXPMIX_DEFINE_ERROR(WordLengthMismatch);
EXPMIX_DEFINE_ERROR(LedgerIncomplete);
EXPMIX_DEFINE_ERROR(NoUNIWitness);
EXPMIX_DEFINE_ERROR(NoConvergence);
EXPMIX_DEFINE_ERROR(SpectralMismatch);
EXPMIX_DEFINE_ERROR(NoCaseWins);
EXPMIX_DEFINE_ERROR(ChiSlopeExceeded);
EXPMIX_DEFINE_ERROR(ConeEscape);
EXPMIX_DEFINE_ERROR(RegularityViolated);
EXPMIX_DEFINE_ERROR(InsufficientDecayWindow);
EXPMIX_DEFINE_ERROR(SeriesNotSettled);
EXPMIX_DEFINE_ERROR(WindowTooShort);
EXPMIX_DEFINE_ERROR(NotConverged);
EXPMIX_DEFINE_ERROR(UnknownModel);
EXPMIX_DEFINE_ERROR(ConfigError);

#undef EXPMIX_DEFINE_ERROR

}  // namespace expmix
