#pragma once

#include <stdexcept>
#include <string>

namespace ghm {

/// Error families map onto process exit codes of the command line tool.
enum class ErrorFamily
{
    Config = 2,
    Precondition = 3,
    Internal = 4,
};

enum class Errc
{
    // configuration
    ParseError,
    ValidationError,
    DegenerateRect,
    DisconnectedDomain,
    UnsupportedLayout,
    // preconditions
    InvalidArgument,
    DisconnectedNetwork,
    NotNeighbors,
    InsufficientTrace,
    NotConverged,
    DiscontinuousOnCycle,
    DiscontinuousState,
    NotACycle,
    OverlappingSupports,
    SparseBand,
    ContinuityRepairFailed,
    InsufficientCorridorLength,
    BasisMismatch,
    NoBoundaryPath,
    BadCorridor,
    NoInitialDefect,
    TorsionDetected,
    Io,
    // internal consistency
    NonIntegralDegree,
    InternalConsistency,
};

const char* to_string(Errc code);
ErrorFamily family_of(Errc code);

class Error : public std::runtime_error
{
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }
    ErrorFamily family() const noexcept { return family_of(code_); }
    int exit_code() const noexcept { return static_cast<int>(family()); }

  private:
    Errc code_;
};

}  // namespace ghm
