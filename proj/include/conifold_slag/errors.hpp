#pragma once

#include <stdexcept>
#include <string>

namespace conifold_slag {

/// Base class for every error raised by the library.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CONIFOLD_SLAG_ERROR(Name)                                   \
    class Name : public GeometryError {                             \
    public:                                                         \
        explicit Name(const std::string& what) : GeometryError(what) {} \
    }

// ambient
CONIFOLD_SLAG_ERROR(OriginError);
CONIFOLD_SLAG_ERROR(NotOnQuadric);
CONIFOLD_SLAG_ERROR(PatchBoundary);
CONIFOLD_SLAG_ERROR(NotOrthogonal);

// cy_structure
CONIFOLD_SLAG_ERROR(DomainError);
CONIFOLD_SLAG_ERROR(BasePointMismatch);
CONIFOLD_SLAG_ERROR(BoltError);

// slag_families
CONIFOLD_SLAG_ERROR(NoConvergence);
CONIFOLD_SLAG_ERROR(SingularJacobian);
CONIFOLD_SLAG_ERROR(ContinuationStall);
CONIFOLD_SLAG_ERROR(DegenerateOrbit);
CONIFOLD_SLAG_ERROR(Infeasible);

// verify_engine
CONIFOLD_SLAG_ERROR(ZeroVolumeForm);
CONIFOLD_SLAG_ERROR(RankDeficient);

#undef CONIFOLD_SLAG_ERROR

}  // namespace conifold_slag
