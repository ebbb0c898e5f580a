#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "phaseid/clustering.hpp"
#include "phaseid/dataset.hpp"

namespace phaseid {

// Result of labeling each cluster with the modal recorded phase of its
// members. Ties are flagged and broken by the fixed order A < B < C.
struct PhaseAssignment {
    std::vector<Phase> predicted;                         // per meter
    std::vector<Phase> cluster_phase;                     // per cluster
    std::vector<std::array<std::uint32_t, 3>> cluster_votes;  // per cluster: A,B,C counts
    std::vector<bool> cluster_ambiguous;                  // tie on the top vote
};

// Every meter must carry a recorded label (ContractError otherwise; use the
// ensemble path for unlabeled feeders).
PhaseAssignment majority_vote(const Partition& partition, const std::vector<Phase>& labels);

// Accuracy in the recorded-vs-predicted tally layout.
struct AccuracyReport {
    std::size_t n_total = 0;
    std::size_t n_validated = 0;  // predictions matching ground truth
    std::size_t n_corrected = 0;  // labels overridden by a corrections file
    std::array<std::uint32_t, 3> recorded_counts{};   // truth tallies A,B,C
    std::array<std::uint32_t, 3> predicted_counts{};  // prediction tallies A,B,C
    double accuracy = 0.0;        // n_validated / n_total
};

AccuracyReport score(const PhaseAssignment& assignment, const std::vector<Phase>& truth);

// Apply corrections (meter index -> phase) on top of recorded labels,
// returning the corrected truth and the number of labels changed.
std::vector<Phase> apply_corrections(std::vector<Phase> labels,
                                     const std::vector<std::optional<Phase>>& corrections,
                                     std::size_t* n_changed = nullptr);

}  // namespace phaseid
