#include "phaseid/labeling.hpp"

#include "phaseid/errors.hpp"

namespace phaseid {

PhaseAssignment majority_vote(const Partition& partition, const std::vector<Phase>& labels) {
    if (labels.size() != partition.assignment.size())
        throw ContractError("majority_vote: label count does not match meter count");

    PhaseAssignment out;
    out.predicted.resize(labels.size(), Phase::A);
    out.cluster_phase.resize(partition.k, Phase::A);
    out.cluster_votes.assign(partition.k, {0, 0, 0});
    out.cluster_ambiguous.assign(partition.k, false);

    for (std::size_t c = 0; c < partition.k; ++c) {
        auto& votes = out.cluster_votes[c];
        for (auto meter : partition.members[c])
            ++votes[static_cast<std::size_t>(labels[meter])];
        // Modal phase; ties flagged and broken by the fixed order A < B < C.
        std::size_t winner = 0;
        for (std::size_t p = 1; p < 3; ++p)
            if (votes[p] > votes[winner]) winner = p;
        std::size_t with_max = 0;
        for (std::size_t p = 0; p < 3; ++p)
            if (votes[p] == votes[winner]) ++with_max;
        out.cluster_phase[c] = static_cast<Phase>(winner);
        out.cluster_ambiguous[c] = with_max > 1;
        for (auto meter : partition.members[c]) out.predicted[meter] = out.cluster_phase[c];
    }
    return out;
}

AccuracyReport score(const PhaseAssignment& assignment, const std::vector<Phase>& truth) {
    if (truth.size() != assignment.predicted.size())
        throw ContractError("score: truth does not cover all meters");
    AccuracyReport report;
    report.n_total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ++report.recorded_counts[static_cast<std::size_t>(truth[i])];
        ++report.predicted_counts[static_cast<std::size_t>(assignment.predicted[i])];
        if (assignment.predicted[i] == truth[i]) ++report.n_validated;
    }
    report.accuracy = report.n_total == 0
                          ? 0.0
                          : static_cast<double>(report.n_validated) / report.n_total;
    return report;
}

std::vector<Phase> apply_corrections(std::vector<Phase> labels,
                                     const std::vector<std::optional<Phase>>& corrections,
                                     std::size_t* n_changed) {
    if (corrections.size() != labels.size())
        throw ContractError("apply_corrections: corrections do not align with meters");
    std::size_t changed = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (corrections[i] && *corrections[i] != labels[i]) {
            labels[i] = *corrections[i];
            ++changed;
        }
    }
    if (n_changed) *n_changed = changed;
    return labels;
}

}  // namespace phaseid
