// Shared assembly core for the single-system and joint dissipative operators:
// both are double/quadruple sums over labeled eigenoperator modes with bath
// coefficients, differing only in the mode list and the cross-correlation
// policy.

#pragma once

#include <optional>

#include "oqs/bath.hpp"
#include "oqs/generators.hpp"

namespace oqs::detail {

struct Mode {
    Mat op;           // embedded eigenoperator on the (joint) space
    double omega = 0; // Bohr frequency
    cplx weight = 0;  // effective bath weight
    CouplingLabel label;
};

enum class PairFilter { all, same_subsystem, cross_subsystem };

// Markov-limit or finite-time K2 over the mode list (finite time when t set).
Mat k2_matrix(const std::vector<Mode>& modes, int dim, const BathModel& bath,
              const CrossCorrelationPolicy& policy, std::optional<double> t,
              PairFilter filter = PairFilter::all);

TimeDependentGenerator k2_terms(const std::vector<Mode>& modes, int dim,
                                const BathModel& bath,
                                const CrossCorrelationPolicy& policy);

Mat k4_matrix(const std::vector<Mode>& modes, int dim, const BathModel& bath,
              const CrossCorrelationPolicy& policy, const std::vector<int>& terms,
              std::optional<double> t, PairFilter filter = PairFilter::all);

TimeDependentGenerator k4_terms(const std::vector<Mode>& modes, int dim,
                                const BathModel& bath,
                                const CrossCorrelationPolicy& policy,
                                const std::vector<int>& term_ids);

std::vector<Mode> single_system_modes(const EigenoperatorSet& es, int subsystem = 0);

}  // namespace oqs::detail
