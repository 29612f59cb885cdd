#pragma once

#include <stdexcept>
#include <string>

namespace degenwave {

// Hard failures surface as typed exceptions; advisory conditions (CFL, step
// size) are reported through flags on the result structs instead.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define DEGENWAVE_DEFINE_ERROR(Name)                                 \
    struct Name : Error {                                            \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

DEGENWAVE_DEFINE_ERROR(NonZeroMean);
DEGENWAVE_DEFINE_ERROR(NonZeroXMean);
DEGENWAVE_DEFINE_ERROR(NoDegeneracy);
DEGENWAVE_DEFINE_ERROR(WindowEmpty);
DEGENWAVE_DEFINE_ERROR(OutOfWindow);
DEGENWAVE_DEFINE_ERROR(ZeroFrequency);
DEGENWAVE_DEFINE_ERROR(FrequencyCollapse);
DEGENWAVE_DEFINE_ERROR(UnderResolved);
DEGENWAVE_DEFINE_ERROR(InsufficientSamples);
DEGENWAVE_DEFINE_ERROR(GridMismatch);
DEGENWAVE_DEFINE_ERROR(BlowUp);
DEGENWAVE_DEFINE_ERROR(ParseError);
DEGENWAVE_DEFINE_ERROR(ValidationError);

#undef DEGENWAVE_DEFINE_ERROR

}  // namespace degenwave
