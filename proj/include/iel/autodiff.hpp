#pragma once

#include "iel/curvemotion.hpp"
#include "iel/diffusion.hpp"
#include "iel/field.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace iel::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One recorded value in the graph. Gradients are allocated by backward()
/// and accumulated in graph insertion order, so runs are reproducible.
/// Scalar-producing ops (losses, reductions) additionally keep their value
/// in `scalar` at full 64-bit precision; the float tensor is a cast of it.
struct Node {
    Field value;
    Field grad;  // allocated by backward(); same shape as value
    double scalar = std::numeric_limits<double>::quiet_NaN();
    const char* op = "";  // producing operation, for diagnostics
    bool requires_grad = false;
    int index = -1;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backward_fn;

    bool grad_ready() const { return grad.size() == value.size(); }
};

/// 64-bit value of a scalar node: the tracked reduction when available,
/// otherwise the float entry widened.
double scalar_value(const NodePtr& n);

/// Records nodes in creation order (a topological order of the DAG) and
/// runs reverse accumulation. One tape per forward pass.
class Tape {
public:
    NodePtr leaf(Field value, bool requires_grad);
    NodePtr record(Field value, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backward_fn);

    /// Reverse-mode sweep from a scalar root: seeds d(root)/d(root) = 1 and
    /// visits every node at most once, in reverse insertion order. Throws if
    /// root is not scalar-shaped (1 x 1 x 1).
    void backward(const NodePtr& root);

    std::size_t size() const { return nodes_.size(); }
    const std::vector<NodePtr>& nodes() const { return nodes_; }

private:
    std::vector<NodePtr> nodes_;
};

/// Hash of the piecewise-linear region the graph evaluated in: relu sign
/// patterns and maxpool argmax choices. Two evaluations with equal hashes
/// were differentiated through the same kink-free region.
std::uint64_t activation_pattern_hash(const Tape& t);

// ---- ops ----------------------------------------------------------------

/// 3x3 cross-correlation, replicate padding, stride 1. `filters` packs
/// (out_ch, in_ch, 3, 3) as a Field with channels = out_ch * in_ch and a
/// 3 x 3 plane per filter slice; `bias` is (out_ch, 1, 1).
NodePtr op_conv3x3(Tape& t, const NodePtr& input, const NodePtr& filters, const NodePtr& bias);

NodePtr op_relu(Tape& t, const NodePtr& x);
/// 2x2 max pooling, stride 2; backward routes to the argmax, first
/// occurrence (row-major within the window) on ties.
NodePtr op_maxpool2(Tape& t, const NodePtr& x);
NodePtr op_upsample_nearest2(Tape& t, const NodePtr& x);
NodePtr op_concat_channels(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr op_add(Tape& t, const NodePtr& a, const NodePtr& b);
NodePtr op_scale(Tape& t, const NodePtr& x, float c);
/// Sum of squares of all entries, as a scalar node.
NodePtr op_sumsq(Tape& t, const NodePtr& x);
/// Fixed linear functional sum(weights .* x), as a scalar node. The weights
/// are constants, not graph nodes.
NodePtr op_weighted_sum(Tape& t, const NodePtr& x, const Field& weights);

/// Heat-diffusion inverse evolution layers on every channel. The operator
/// is linear and self-adjoint, so backward applies the same layer stack to
/// the incoming gradient.
NodePtr op_iel_heat(Tape& t, const NodePtr& logits, const DiffusionConfig& cfg);
/// Forward counterpart (smoothing); also linear and self-adjoint.
NodePtr op_fel_heat(Tape& t, const NodePtr& logits, const DiffusionConfig& cfg);

/// Curve-motion layers. For 2-channel logits the motion runs on the score
/// channel1 - channel0 and the result is written back through channel 1;
/// single-channel logits evolve directly. Backward holds each step's speed
/// field constant and differentiates through the gradient magnitude only
/// (subgradient 0 where the magnitude vanishes).
NodePtr op_curve_iel(Tape& t, const NodePtr& logits, const CurveMotionConfig& cfg);

/// Mean over pixels of -log softmax(logits)[target], max-stabilized.
NodePtr softmax_cross_entropy(Tape& t, const NodePtr& logits, const LabelMask& target);

/// lambda * h^2 * dirichlet_energy(logits), differentiable.
NodePtr grad_penalty_term(Tape& t, const NodePtr& logits, float lambda);

}  // namespace iel::ad
