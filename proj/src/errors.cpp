#include "ghm/errors.hpp"

namespace ghm {

const char* to_string(Errc code)
{
    switch (code)
    {
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::DegenerateRect: return "DegenerateRect";
        case Errc::DisconnectedDomain: return "DisconnectedDomain";
        case Errc::UnsupportedLayout: return "UnsupportedLayout";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::DisconnectedNetwork: return "DisconnectedNetwork";
        case Errc::NotNeighbors: return "NotNeighbors";
        case Errc::InsufficientTrace: return "InsufficientTrace";
        case Errc::NotConverged: return "NotConverged";
        case Errc::DiscontinuousOnCycle: return "DiscontinuousOnCycle";
        case Errc::DiscontinuousState: return "DiscontinuousState";
        case Errc::NotACycle: return "NotACycle";
        case Errc::OverlappingSupports: return "OverlappingSupports";
        case Errc::SparseBand: return "SparseBand";
        case Errc::ContinuityRepairFailed: return "ContinuityRepairFailed";
        case Errc::InsufficientCorridorLength: return "InsufficientCorridorLength";
        case Errc::BasisMismatch: return "BasisMismatch";
        case Errc::NoBoundaryPath: return "NoBoundaryPath";
        case Errc::BadCorridor: return "BadCorridor";
        case Errc::NoInitialDefect: return "NoInitialDefect";
        case Errc::TorsionDetected: return "TorsionDetected";
        case Errc::Io: return "Io";
        case Errc::NonIntegralDegree: return "NonIntegralDegree";
        case Errc::InternalConsistency: return "InternalConsistency";
    }
    return "Unknown";
}

ErrorFamily family_of(Errc code)
{
    switch (code)
    {
        case Errc::ParseError:
        case Errc::ValidationError:
        case Errc::DegenerateRect:
        case Errc::DisconnectedDomain:
        case Errc::UnsupportedLayout:
            return ErrorFamily::Config;
        case Errc::NonIntegralDegree:
        case Errc::InternalConsistency:
            return ErrorFamily::Internal;
        default:
            return ErrorFamily::Precondition;
    }
}

}  // namespace ghm
