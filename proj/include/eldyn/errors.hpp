#pragma once

#include <stdexcept>
#include <string>

namespace eldyn {

/// Base of every domain failure. `kind()` is the stable machine-readable tag
/// written to the CLI error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ELDYN_ERROR_TYPE(Name)                                                  \
    class Name : public Error {                                                 \
    public:                                                                     \
        explicit Name(const std::string& what) : Error(#Name, what) {}          \
    }

ELDYN_ERROR_TYPE(DomainError);
ELDYN_ERROR_TYPE(BranchCutError);
ELDYN_ERROR_TYPE(UnsupportedRegion);
ELDYN_ERROR_TYPE(ContractRegimeError);
ELDYN_ERROR_TYPE(AddressNotRealized);
ELDYN_ERROR_TYPE(UnresolvedTail);
ELDYN_ERROR_TYPE(ItineraryUnreadable);
ELDYN_ERROR_TYPE(OrbitLeftHalfPlane);
ELDYN_ERROR_TYPE(TailTooShort);
ELDYN_ERROR_TYPE(NotConverged);
ELDYN_ERROR_TYPE(PreconditionError);
ELDYN_ERROR_TYPE(ConfigError);

#undef ELDYN_ERROR_TYPE

}  // namespace eldyn
