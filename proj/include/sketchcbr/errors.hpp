#pragma once
// Exception hierarchy shared by all modules.

#include <stdexcept>
#include <string>

namespace sketchcbr {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SKETCHCBR_DEFINE_ERROR(Name)                                \
    struct Name : Error {                                           \
        explicit Name(const std::string& msg) : Error(msg) {}       \
    }

SKETCHCBR_DEFINE_ERROR(ControlPointError);
SKETCHCBR_DEFINE_ERROR(DegenerateGeometryError);
SKETCHCBR_DEFINE_ERROR(DimensionError);
SKETCHCBR_DEFINE_ERROR(ConfigError);
SKETCHCBR_DEFINE_ERROR(CorrespondenceError);
SKETCHCBR_DEFINE_ERROR(IoError);
SKETCHCBR_DEFINE_ERROR(FormatError);
SKETCHCBR_DEFINE_ERROR(ValidationError);
SKETCHCBR_DEFINE_ERROR(VersionError);
SKETCHCBR_DEFINE_ERROR(PatchTooSmallError);
SKETCHCBR_DEFINE_ERROR(EmptyRegionError);
SKETCHCBR_DEFINE_ERROR(RegionMismatchError);
SKETCHCBR_DEFINE_ERROR(InsufficientDataError);
SKETCHCBR_DEFINE_ERROR(DegenerateTargetError);
SKETCHCBR_DEFINE_ERROR(SolverError);
SKETCHCBR_DEFINE_ERROR(CompositionError);

#undef SKETCHCBR_DEFINE_ERROR

}  // namespace sketchcbr
