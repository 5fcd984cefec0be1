#pragma once

#include "graspkit/cloud.hpp"
#include "graspkit/hand.hpp"

#include <string>
#include <vector>

namespace grasp {

enum class Label { Positive, Negative, Indeterminate };

std::string to_string(Label l);
Label label_from_string(const std::string& s);

/// How an unverified hand is promoted to a negative example. `MaxCount`
/// requires both closing directions to fall short of k from the visible
/// surfaces; `SumCount` requires the combined count to fall short.
enum class NegativeRule { MaxCount, SumCount };

struct LabelOutcome {
    Label label = Label::Indeterminate;
    int k_pos = 0; // points with normal within theta of +closing
    int k_neg = 0; // points with normal within theta of -closing
};

struct LabelerConfig {
    int k = 6;
    double theta = 20.0 * M_PI / 180.0;
    NegativeRule negative_rule = NegativeRule::MaxCount;
    double normal_radius = 0.03; // used when label_dataset estimates normals

    void validate() const;
};

/// Near-antipodal test: counts closing-region points whose normals align
/// with each finger-closing direction within theta. Positive iff both counts
/// reach k; Negative iff the visible counts cannot reach k even with the
/// unseen side observed; otherwise Indeterminate.
/// The cloud must carry estimated normals; points with invalid normals are
/// excluded from both counts.
LabelOutcome label_hand(const HandHypothesis& h, const PointCloud& c, const LabelerConfig& cfg);

struct LabeledHand {
    HandHypothesis hand;
    LabelOutcome outcome;
};

/// Labels hands on the registered two-view cloud merge(c1, c2), estimating
/// normals on the merged cloud first. Indeterminate hands are dropped.
std::vector<LabeledHand> label_dataset(const std::vector<HandHypothesis>& hands,
                                       const PointCloud& c1, const PointCloud& c2,
                                       const LabelerConfig& cfg);

/// As above but on an already-merged cloud (normals estimated here unless
/// the cloud has them).
std::vector<LabeledHand> label_dataset_merged(const std::vector<HandHypothesis>& hands,
                                              const PointCloud& merged,
                                              const LabelerConfig& cfg);

void save_labeled_jsonl(const std::vector<LabeledHand>& hands, const std::string& path);
std::vector<LabeledHand> load_labeled_jsonl(const std::string& path);

}  // namespace grasp
