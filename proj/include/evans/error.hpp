#pragma once

#include <stdexcept>
#include <string>

namespace evans {

/// Base class for every failure raised by the library.
///
/// `kind()` is a stable machine-readable tag; the CLI writes it into
/// report.json so benchmark harnesses can branch on it.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define EVANS_DEFINE_ERROR(Name, tag)                                        \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& message) : Error(tag, message) {}   \
    };

EVANS_DEFINE_ERROR(InvalidArgument, "invalid_argument")
EVANS_DEFINE_ERROR(ConvergenceError, "convergence")
EVANS_DEFINE_ERROR(RankDeficientError, "rank_deficient")
EVANS_DEFINE_ERROR(DegeneracyError, "hypothesis2_violation")
EVANS_DEFINE_ERROR(TrackingError, "tracking_ambiguity")
EVANS_DEFINE_ERROR(StepTooLargeError, "step_too_large")
EVANS_DEFINE_ERROR(SingularSystemError, "singular_collocation")
EVANS_DEFINE_ERROR(AccuracyError, "accuracy")
EVANS_DEFINE_ERROR(BasisCollapseError, "basis_collapse")
EVANS_DEFINE_ERROR(InconsistentBasisError, "inconsistent_basis")
EVANS_DEFINE_ERROR(RootOnContourError, "root_on_contour")
EVANS_DEFINE_ERROR(RefinementError, "insufficient_refinement")
EVANS_DEFINE_ERROR(BudgetError, "budget_exhausted")
EVANS_DEFINE_ERROR(IngestionError, "ingestion")
EVANS_DEFINE_ERROR(StiffnessError, "stiffness")

#undef EVANS_DEFINE_ERROR

/// Rethrow `e` as its own concrete type with `prefix` prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& prefix) {
    const std::string msg = prefix + e.what();
    const std::string& k = e.kind();
    if (k == "invalid_argument") throw InvalidArgument(msg);
    if (k == "convergence") throw ConvergenceError(msg);
    if (k == "rank_deficient") throw RankDeficientError(msg);
    if (k == "hypothesis2_violation") throw DegeneracyError(msg);
    if (k == "tracking_ambiguity") throw TrackingError(msg);
    if (k == "step_too_large") throw StepTooLargeError(msg);
    if (k == "singular_collocation") throw SingularSystemError(msg);
    if (k == "accuracy") throw AccuracyError(msg);
    if (k == "basis_collapse") throw BasisCollapseError(msg);
    if (k == "inconsistent_basis") throw InconsistentBasisError(msg);
    if (k == "root_on_contour") throw RootOnContourError(msg);
    if (k == "insufficient_refinement") throw RefinementError(msg);
    if (k == "budget_exhausted") throw BudgetError(msg);
    if (k == "ingestion") throw IngestionError(msg);
    if (k == "stiffness") throw StiffnessError(msg);
    throw Error(k, msg);
}

}  // namespace evans
