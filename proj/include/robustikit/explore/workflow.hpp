#pragma once

#include "robustikit/transform/robustify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace robustikit
{

enum class Stage : std::uint8_t
{
    PreconditionFailed,
    Injected,
    PreservingSuccess,
    RepurposingSuccess,
    Infeasible,
    Unknown // a condition could not be decided, e.g. an unbound constant
};

inline const char* stage_name( Stage s )
{
    switch ( s )
    {
    case Stage::PreconditionFailed:
        return "precondition-failed";
    case Stage::Injected:
        return "injected";
    case Stage::PreservingSuccess:
        return "pR-success";
    case Stage::RepurposingSuccess:
        return "rR-success";
    case Stage::Unknown:
        return "unknown";
    default:
        return "infeasible";
    }
}

inline const char* infeasible_recommendation()
{
    return "decrease the level of uncertainty or relax the safety invariant";
}

struct WorkflowResult
{
    Stage stage = Stage::Injected;
    std::vector<CheckReport> preconditions;
    std::optional<Machine> injected;
    std::optional<RobustifyOutcome> preserving;
    std::optional<RobustifyOutcome> repurposing; // only tried when preserving fails
    std::string recommendation;

    [[nodiscard]] const Machine* machine() const
    {
        if ( stage == Stage::PreservingSuccess )
            return &*preserving->machine;
        if ( stage == Stage::RepurposingSuccess )
            return &*repurposing->machine;
        return nullptr;
    }

    [[nodiscard]] const RobustifyOutcome* outcome() const
    {
        if ( stage == Stage::PreservingSuccess )
            return &*preserving;
        if ( stage == Stage::RepurposingSuccess )
            return &*repurposing;
        return nullptr;
    }
};

inline std::vector<CheckReport> baseline_checks( const Model& m, const CheckOptions& opts = {} )
{
    return { check_partitioning( m, opts ), check_invariant_preservation( m, opts ), check_feasibility( m, opts ) };
}

// Inject, then try action-preserving robustification and fall back to the
// repurposing one. The original must itself be partitioned, invariant
// preserving and feasible.
inline WorkflowResult run_workflow( const Machine& m, const UncertaintySpec& spec, const Bindings& bindings = {},
                                    const RobustifyOptions& opts = {} )
{
    WorkflowResult r;
    Model model( m, bindings, opts.limits );
    r.preconditions = baseline_checks( model, opts.check );
    for ( const auto& c : r.preconditions )
        if ( !c.holds() )
        {
            r.stage = c.verdict == Verdict::Unknown ? Stage::Unknown : Stage::PreconditionFailed;
            return r;
        }

    r.injected = inject( m, spec, bindings );
    r.stage = Stage::Injected;
    r.preserving = robustify( Derivation::Preserving, m, spec, bindings, opts );
    if ( r.preserving->machine )
    {
        r.stage = Stage::PreservingSuccess;
        return r;
    }
    if ( r.preserving->condition.verdict == Verdict::Unknown )
    {
        r.stage = Stage::Unknown;
        return r;
    }
    r.repurposing = robustify( Derivation::Repurposing, m, spec, bindings, opts );
    if ( r.repurposing->machine )
    {
        r.stage = Stage::RepurposingSuccess;
        return r;
    }
    if ( r.repurposing->condition.verdict == Verdict::Unknown )
    {
        r.stage = Stage::Unknown;
        return r;
    }
    r.stage = Stage::Infeasible;
    r.recommendation = infeasible_recommendation();
    return r;
}

} // namespace robustikit
