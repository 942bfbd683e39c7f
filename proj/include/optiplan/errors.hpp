#pragma once

#include <stdexcept>
#include <string>

namespace optiplan {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define OPTIPLAN_DEFINE_ERROR(NAME)                                   \
    class NAME : public Error {                                       \
    public:                                                           \
        explicit NAME(const std::string& what) : Error(what) {}       \
    }

// linear algebra
OPTIPLAN_DEFINE_ERROR(NotSquare);
OPTIPLAN_DEFINE_ERROR(NotSymmetric);
OPTIPLAN_DEFINE_ERROR(NotPositiveDefinite);
OPTIPLAN_DEFINE_ERROR(DimensionMismatch);
OPTIPLAN_DEFINE_ERROR(SingularSystem);

// network model
OPTIPLAN_DEFINE_ERROR(NoPath);
OPTIPLAN_DEFINE_ERROR(UnreachableSegment);
OPTIPLAN_DEFINE_ERROR(BrokenChain);

// forecasting
OPTIPLAN_DEFINE_ERROR(DegenerateSeries);
OPTIPLAN_DEFINE_ERROR(InsufficientData);
OPTIPLAN_DEFINE_ERROR(EmptyWindow);

// optimization
OPTIPLAN_DEFINE_ERROR(NoDiversePath);
OPTIPLAN_DEFINE_ERROR(NoCapacity);
OPTIPLAN_DEFINE_ERROR(InsufficientResources);
OPTIPLAN_DEFINE_ERROR(InfeasibleScenario);

// qot
OPTIPLAN_DEFINE_ERROR(EmptyPath);
OPTIPLAN_DEFINE_ERROR(NotConverged);
OPTIPLAN_DEFINE_ERROR(EmptySelection);
OPTIPLAN_DEFINE_ERROR(SchemaMismatch);

// file handling
OPTIPLAN_DEFINE_ERROR(ParseError);
OPTIPLAN_DEFINE_ERROR(IoError);

#undef OPTIPLAN_DEFINE_ERROR

}  // namespace optiplan
