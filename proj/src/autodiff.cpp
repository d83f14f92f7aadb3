#include "iel/autodiff.hpp"

#include "iel/kernels.hpp"
#include "iel/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace iel::ad {

double scalar_value(const NodePtr& n) {
    if (!std::isnan(n->scalar)) return n->scalar;
    return static_cast<double>(n->value.values[0]);
}

std::uint64_t activation_pattern_hash(const Tape& t) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (const NodePtr& n : t.nodes()) {
        if (std::strcmp(n->op, "relu") == 0) {
            const Field& x = n->parents[0]->value;
            for (std::size_t i = 0; i < x.size(); ++i) mix(x.values[i] > 0.0f ? i * 2 + 1 : i * 2);
        } else if (std::strcmp(n->op, "maxpool2") == 0) {
            const Field& x = n->parents[0]->value;
            for (int c = 0; c < x.channels; ++c) {
                const float* p = x.plane(c);
                for (int i = 0; i + 1 < x.rows; i += 2)
                    for (int j = 0; j + 1 < x.cols; j += 2) {
                        std::size_t idx[4] = {
                            static_cast<std::size_t>(i) * x.cols + j,
                            static_cast<std::size_t>(i) * x.cols + j + 1,
                            static_cast<std::size_t>(i + 1) * x.cols + j,
                            static_cast<std::size_t>(i + 1) * x.cols + j + 1,
                        };
                        int best = 0;
                        for (int k = 1; k < 4; ++k)
                            if (p[idx[k]] > p[idx[best]]) best = k;
                        mix(idx[best] * 4 + static_cast<std::size_t>(best));
                    }
            }
        }
    }
    return h;
}

NodePtr Tape::leaf(Field value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = requires_grad;
    n->index = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    return n;
}

NodePtr Tape::record(Field value, std::vector<NodePtr> parents,
                     std::function<void(Node&)> backward_fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) n->backward_fn = std::move(backward_fn);
    n->index = static_cast<int>(nodes_.size());
    nodes_.push_back(n);
    return n;
}

void Tape::backward(const NodePtr& root) {
    if (root->value.size() != 1)
        throw std::invalid_argument("backward: root must be a scalar node");
    if (!root->requires_grad) return;
    for (int i = 0; i <= root->index; ++i) {
        Node& n = *nodes_[static_cast<std::size_t>(i)];
        if (n.requires_grad)
            n.grad = Field(n.value.channels, n.value.rows, n.value.cols, n.value.spacing);
    }
    root->grad.values[0] = 1.0f;
    for (int i = root->index; i >= 0; --i) {
        Node& n = *nodes_[static_cast<std::size_t>(i)];
        if (n.requires_grad && n.backward_fn) n.backward_fn(n);
    }
}

namespace {

Field zeros_like(const Field& f) { return Field(f.channels, f.rows, f.cols, f.spacing); }

void add_into(Field& dst, const Field& src) {
    kernels::active().scale_add(dst.values.data(), src.values.data(), 1.0f, dst.size());
}

// Adjoint of the centered-difference gradient magnitude of a single plane:
// accumulates d(sum upstream .* mag(s))/ds into gs. Subgradient 0 where the
// magnitude is 0.
void grad_mag_backward_acc(const Field& s, const Field& upstream, Field& gs) {
    const int rows = s.rows, cols = s.cols;
    const float inv_2h = 1.0f / (2.0f * s.spacing);
    const float* p = s.plane(0);
    const float* up = upstream.plane(0);
    float* g = gs.plane(0);
    for (int i = 0; i < rows; ++i) {
        int i0 = i == 0 ? 0 : i - 1;
        int i2 = i == rows - 1 ? rows - 1 : i + 1;
        for (int j = 0; j < cols; ++j) {
            int j0 = j == 0 ? 0 : j - 1;
            int j2 = j == cols - 1 ? cols - 1 : j + 1;
            float dx = p[static_cast<std::size_t>(i2) * cols + j] - p[static_cast<std::size_t>(i0) * cols + j];
            float dy = p[static_cast<std::size_t>(i) * cols + j2] - p[static_cast<std::size_t>(i) * cols + j0];
            float q = std::sqrt(dx * dx + dy * dy);
            if (q == 0.0f) continue;
            float a = up[static_cast<std::size_t>(i) * cols + j] * inv_2h / q;
            g[static_cast<std::size_t>(i2) * cols + j] += a * dx;
            g[static_cast<std::size_t>(i0) * cols + j] -= a * dx;
            g[static_cast<std::size_t>(i) * cols + j2] += a * dy;
            g[static_cast<std::size_t>(i) * cols + j0] -= a * dy;
        }
    }
}

}  // namespace

NodePtr op_conv3x3(Tape& t, const NodePtr& input, const NodePtr& filters, const NodePtr& bias) {
    const int in_ch = input->value.channels;
    const int out_ch = bias->value.channels;
    if (filters->value.rows != 3 || filters->value.cols != 3)
        throw std::invalid_argument("op_conv3x3: filters must have 3x3 planes");
    if (filters->value.channels != out_ch * in_ch)
        throw std::invalid_argument("op_conv3x3: filter/bias channel mismatch with input");
    if (bias->value.rows != 1 || bias->value.cols != 1)
        throw std::invalid_argument("op_conv3x3: bias must be (out_ch, 1, 1)");

    Field out(out_ch, input->value.rows, input->value.cols, input->value.spacing);
    kernels::active().conv3x3_forward(input->value.values.data(), filters->value.values.data(),
                                      bias->value.values.data(), out.values.data(),
                                      in_ch, out_ch, out.rows, out.cols);
    NodePtr in_p = input, f_p = filters, b_p = bias;
    NodePtr out_node = t.record(std::move(out), {input, filters, bias}, [in_p, f_p, b_p](Node& self) {
        const int rows = self.value.rows, cols = self.value.cols;
        const int ic = in_p->value.channels, oc = b_p->value.channels;
        if (in_p->requires_grad)
            kernels::active().conv3x3_backward_input(self.grad.values.data(),
                                                     f_p->value.values.data(),
                                                     in_p->grad.values.data(), ic, oc, rows, cols);
        if (f_p->requires_grad || b_p->requires_grad)
            kernels::active().conv3x3_backward_filters(in_p->value.values.data(),
                                                       self.grad.values.data(),
                                                       f_p->grad.values.data(),
                                                       b_p->grad.values.data(), ic, oc, rows, cols);
    });
    out_node->op = "conv3x3";
    return out_node;
}

NodePtr op_relu(Tape& t, const NodePtr& x) {
    Field out = zeros_like(x->value);
    kernels::active().relu_forward(x->value.values.data(), out.values.data(), out.size());
    NodePtr xp = x;
    NodePtr out_node = t.record(std::move(out), {x}, [xp](Node& self) {
        if (!xp->requires_grad) return;
        kernels::active().relu_backward_acc(xp->value.values.data(), self.grad.values.data(),
                                            xp->grad.values.data(), self.value.size());
    });
    out_node->op = "relu";
    return out_node;
}

NodePtr op_maxpool2(Tape& t, const NodePtr& x) {
    const Field& v = x->value;
    if (v.rows % 2 != 0 || v.cols % 2 != 0)
        throw std::invalid_argument("op_maxpool2: rows and cols must be even");
    Field out(v.channels, v.rows / 2, v.cols / 2, v.spacing);
    for (int c = 0; c < v.channels; ++c) {
        const float* p = v.plane(c);
        float* o = out.plane(c);
        for (int i = 0; i < out.rows; ++i) {
            for (int j = 0; j < out.cols; ++j) {
                float best = p[static_cast<std::size_t>(2 * i) * v.cols + 2 * j];
                best = std::max(best, p[static_cast<std::size_t>(2 * i) * v.cols + 2 * j + 1]);
                best = std::max(best, p[static_cast<std::size_t>(2 * i + 1) * v.cols + 2 * j]);
                best = std::max(best, p[static_cast<std::size_t>(2 * i + 1) * v.cols + 2 * j + 1]);
                o[static_cast<std::size_t>(i) * out.cols + j] = best;
            }
        }
    }
    NodePtr xp = x;
    NodePtr out_node = t.record(std::move(out), {x}, [xp](Node& self) {
        if (!xp->requires_grad) return;
        const Field& v = xp->value;
        for (int c = 0; c < v.channels; ++c) {
            const float* p = v.plane(c);
            const float* g = self.grad.plane(c);
            float* gx = xp->grad.plane(c);
            for (int i = 0; i < self.value.rows; ++i) {
                for (int j = 0; j < self.value.cols; ++j) {
                    // first occurrence of the max in row-major window order
                    std::size_t idx[4] = {
                        static_cast<std::size_t>(2 * i) * v.cols + 2 * j,
                        static_cast<std::size_t>(2 * i) * v.cols + 2 * j + 1,
                        static_cast<std::size_t>(2 * i + 1) * v.cols + 2 * j,
                        static_cast<std::size_t>(2 * i + 1) * v.cols + 2 * j + 1,
                    };
                    int best = 0;
                    for (int k = 1; k < 4; ++k)
                        if (p[idx[k]] > p[idx[best]]) best = k;
                    gx[idx[best]] += g[static_cast<std::size_t>(i) * self.value.cols + j];
                }
            }
        }
    });
    out_node->op = "maxpool2";
    return out_node;
}

NodePtr op_upsample_nearest2(Tape& t, const NodePtr& x) {
    const Field& v = x->value;
    Field out(v.channels, v.rows * 2, v.cols * 2, v.spacing);
    for (int c = 0; c < v.channels; ++c) {
        const float* p = v.plane(c);
        float* o = out.plane(c);
        for (int i = 0; i < out.rows; ++i) {
            const float* src = p + static_cast<std::size_t>(i / 2) * v.cols;
            float* dst = o + static_cast<std::size_t>(i) * out.cols;
            for (int j = 0; j < out.cols; ++j) dst[j] = src[j / 2];
        }
    }
    NodePtr xp = x;
    NodePtr out_node = t.record(std::move(out), {x}, [xp](Node& self) {
        if (!xp->requires_grad) return;
        const Field& v = xp->value;
        for (int c = 0; c < v.channels; ++c) {
            const float* g = self.grad.plane(c);
            float* gx = xp->grad.plane(c);
            for (int i = 0; i < self.value.rows; ++i)
                for (int j = 0; j < self.value.cols; ++j)
                    gx[static_cast<std::size_t>(i / 2) * v.cols + j / 2] +=
                        g[static_cast<std::size_t>(i) * self.value.cols + j];
        }
    });
    out_node->op = "upsample2";
    return out_node;
}

NodePtr op_concat_channels(Tape& t, const NodePtr& a, const NodePtr& b) {
    const Field& va = a->value;
    const Field& vb = b->value;
    if (va.rows != vb.rows || va.cols != vb.cols)
        throw std::invalid_argument("op_concat_channels: spatial shape mismatch");
    Field out(va.channels + vb.channels, va.rows, va.cols, va.spacing);
    std::copy(va.values.begin(), va.values.end(), out.values.begin());
    std::copy(vb.values.begin(), vb.values.end(), out.values.begin() + static_cast<std::ptrdiff_t>(va.size()));
    NodePtr ap = a, bp = b;
    NodePtr out_node = t.record(std::move(out), {a, b}, [ap, bp](Node& self) {
        const std::size_t na = ap->value.size();
        if (ap->requires_grad)
            kernels::active().scale_add(ap->grad.values.data(), self.grad.values.data(), 1.0f, na);
        if (bp->requires_grad)
            kernels::active().scale_add(bp->grad.values.data(), self.grad.values.data() + na, 1.0f,
                                        bp->value.size());
    });
    out_node->op = "concat";
    return out_node;
}

NodePtr op_add(Tape& t, const NodePtr& a, const NodePtr& b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("op_add: shape mismatch");
    NodePtr ap = a, bp = b;
    NodePtr out = t.record(a->value + b->value, {a, b}, [ap, bp](Node& self) {
        if (ap->requires_grad) add_into(ap->grad, self.grad);
        if (bp->requires_grad) add_into(bp->grad, self.grad);
    });
    if (out->value.size() == 1) {
        out->scalar = scalar_value(a) + scalar_value(b);
        out->value.values[0] = static_cast<float>(out->scalar);
    }
    return out;
}

NodePtr op_scale(Tape& t, const NodePtr& x, float c) {
    NodePtr xp = x;
    NodePtr out = t.record(c * x->value, {x}, [xp, c](Node& self) {
        if (!xp->requires_grad) return;
        kernels::active().scale_add(xp->grad.values.data(), self.grad.values.data(), c,
                                    self.value.size());
    });
    if (out->value.size() == 1) {
        out->scalar = static_cast<double>(c) * scalar_value(x);
        out->value.values[0] = static_cast<float>(out->scalar);
    }
    return out;
}

NodePtr op_sumsq(Tape& t, const NodePtr& x) {
    Field out(1, 1, 1);
    double acc = 0.0;
    for (float v : x->value.values) acc += static_cast<double>(v) * v;
    out.values[0] = static_cast<float>(acc);
    NodePtr xp = x;
    NodePtr node = t.record(std::move(out), {x}, [xp](Node& self) {
        if (!xp->requires_grad) return;
        float g = 2.0f * self.grad.values[0];
        kernels::active().scale_add(xp->grad.values.data(), xp->value.values.data(), g,
                                    xp->value.size());
    });
    node->scalar = acc;
    return node;
}

NodePtr op_weighted_sum(Tape& t, const NodePtr& x, const Field& weights) {
    if (!x->value.same_shape(weights))
        throw std::invalid_argument("op_weighted_sum: shape mismatch");
    Field out(1, 1, 1);
    double acc = dot(x->value, weights);
    out.values[0] = static_cast<float>(acc);
    NodePtr xp = x;
    auto w = std::make_shared<Field>(weights);
    NodePtr node = t.record(std::move(out), {x}, [xp, w](Node& self) {
        if (!xp->requires_grad) return;
        kernels::active().scale_add(xp->grad.values.data(), w->values.data(),
                                    self.grad.values[0], xp->value.size());
    });
    node->scalar = acc;
    return node;
}

NodePtr op_iel_heat(Tape& t, const NodePtr& logits, const DiffusionConfig& cfg) {
    cfg.validate();
    NodePtr lp = logits;
    NodePtr out_node = t.record(apply_iels(logits->value, cfg), {logits}, [lp, cfg](Node& self) {
        if (!lp->requires_grad) return;
        add_into(lp->grad, apply_iels(self.grad, cfg));
    });
    out_node->op = "iel_heat";
    return out_node;
}

NodePtr op_fel_heat(Tape& t, const NodePtr& logits, const DiffusionConfig& cfg) {
    cfg.validate();
    NodePtr lp = logits;
    NodePtr out_node = t.record(apply_fels(logits->value, cfg), {logits}, [lp, cfg](Node& self) {
        if (!lp->requires_grad) return;
        add_into(lp->grad, apply_fels(self.grad, cfg));
    });
    out_node->op = "fel_heat";
    return out_node;
}

NodePtr op_curve_iel(Tape& t, const NodePtr& logits, const CurveMotionConfig& cfg) {
    cfg.validate();
    const Field& v = logits->value;
    if (v.channels != 1 && v.channels != 2)
        throw std::invalid_argument("op_curve_iel: expects 1- or 2-channel logits");
    const bool score_mode = v.channels == 2;

    // score to evolve: channel1 - channel0 in score mode, the lone channel otherwise
    Field score(1, v.rows, v.cols, v.spacing);
    if (score_mode) {
        const float* l0 = v.plane(0);
        const float* l1 = v.plane(1);
        for (std::size_t i = 0; i < score.size(); ++i) score.values[i] = l1[i] - l0[i];
    } else {
        std::copy(v.plane(0), v.plane(0) + v.plane_size(), score.values.begin());
    }

    // rollout, keeping every intermediate score for the backward sweep
    auto intermediates = std::make_shared<std::vector<Field>>();
    auto speeds = std::make_shared<std::vector<Field>>();
    intermediates->reserve(static_cast<std::size_t>(cfg.n_steps) + 1);
    intermediates->push_back(score);
    CurveMotionConfig one = cfg;
    one.n_steps = 1;
    for (int n = 0; n < cfg.n_steps; ++n) {
        CurveMotionTrace tr = run_curve_motion_iels_traced(intermediates->back(), 0, one);
        speeds->push_back(std::move(tr.speeds[0]));
        intermediates->push_back(std::move(tr.output));
    }
    const Field& final_score = intermediates->back();

    Field out = v;
    if (score_mode) {
        const float* l0 = v.plane(0);
        float* o1 = out.plane(1);
        for (std::size_t i = 0; i < final_score.size(); ++i) o1[i] = l0[i] + final_score.values[i];
    } else {
        std::copy(final_score.values.begin(), final_score.values.end(), out.plane(0));
    }

    NodePtr lp = logits;
    NodePtr out_node = t.record(std::move(out), {logits},
                    [lp, cfg, intermediates, speeds, score_mode](Node& self) {
        if (!lp->requires_grad) return;
        const int rows = self.value.rows, cols = self.value.cols;
        const std::size_t plane = static_cast<std::size_t>(rows) * cols;
        // w = (d final_score / d initial_score)^T applied to the incoming
        // gradient of the evolved channel, with the speeds held constant.
        Field w(1, rows, cols, self.value.spacing);
        {
            const float* gsrc = score_mode ? self.grad.plane(1) : self.grad.plane(0);
            std::copy(gsrc, gsrc + plane, w.values.begin());
        }
        for (int n = cfg.n_steps - 1; n >= 0; --n) {
            const Field& s_n = (*intermediates)[static_cast<std::size_t>(n)];
            const Field& v_n = (*speeds)[static_cast<std::size_t>(n)];
            Field upstream(1, rows, cols, self.value.spacing);
            for (std::size_t i = 0; i < plane; ++i)
                upstream.values[i] = cfg.dt * v_n.values[i] * w.values[i];
            grad_mag_backward_acc(s_n, upstream, w);  // w += adjoint term
        }
        if (score_mode) {
            // out0 = l0, out1 = l0 + S(l1 - l0)
            float* g0 = lp->grad.plane(0);
            float* g1 = lp->grad.plane(1);
            const float* gout0 = self.grad.plane(0);
            const float* gout1 = self.grad.plane(1);
            for (std::size_t i = 0; i < plane; ++i) {
                g1[i] += w.values[i];
                g0[i] += gout0[i] + gout1[i] - w.values[i];
            }
        } else {
            float* g0 = lp->grad.plane(0);
            for (std::size_t i = 0; i < plane; ++i) g0[i] += w.values[i];
        }
    });
    out_node->op = "curve_iel";
    return out_node;
}

NodePtr softmax_cross_entropy(Tape& t, const NodePtr& logits, const LabelMask& target) {
    const Field& v = logits->value;
    if (v.rows != target.rows || v.cols != target.cols)
        throw std::invalid_argument("softmax_cross_entropy: spatial shape mismatch");
    if (target.classes != v.channels)
        throw std::invalid_argument("softmax_cross_entropy: target classes != logit channels");
    for (std::int32_t id : target.ids)
        if (id < 0 || id >= v.channels)
            throw std::out_of_range("softmax_cross_entropy: class id out of range");

    const std::size_t plane = v.plane_size();
    auto probs = std::make_shared<Field>(v.channels, v.rows, v.cols, v.spacing);
    double loss = 0.0;
    for (std::size_t px = 0; px < plane; ++px) {
        float m = v.values[px];
        for (int c = 1; c < v.channels; ++c) m = std::max(m, v.values[plane * c + px]);
        double sum = 0.0;
        for (int c = 0; c < v.channels; ++c) {
            float e = std::exp(v.values[plane * c + px] - m);
            probs->values[plane * c + px] = e;
            sum += e;
        }
        float inv = static_cast<float>(1.0 / sum);
        for (int c = 0; c < v.channels; ++c) probs->values[plane * c + px] *= inv;
        std::size_t tgt = plane * static_cast<std::size_t>(target.ids[px]) + px;
        loss += std::log(sum) - static_cast<double>(v.values[tgt] - m);
    }
    Field out(1, 1, 1);
    const double mean_loss = loss / static_cast<double>(plane);
    out.values[0] = static_cast<float>(mean_loss);

    NodePtr lp = logits;
    auto tgt_ids = std::make_shared<std::vector<std::int32_t>>(target.ids);
    NodePtr node = t.record(std::move(out), {logits}, [lp, probs, tgt_ids](Node& self) {
        if (!lp->requires_grad) return;
        const std::size_t plane = lp->value.plane_size();
        const float scale = self.grad.values[0] / static_cast<float>(plane);
        float* g = lp->grad.values.data();
        const float* p = probs->values.data();
        for (std::size_t px = 0; px < plane; ++px) {
            for (int c = 0; c < lp->value.channels; ++c)
                g[plane * c + px] += scale * p[plane * c + px];
            g[plane * static_cast<std::size_t>((*tgt_ids)[px]) + px] -= scale;
        }
    });
    node->scalar = mean_loss;
    return node;
}

NodePtr grad_penalty_term(Tape& t, const NodePtr& logits, float lambda) {
    if (lambda < 0.0f) throw std::invalid_argument("grad_penalty_term: lambda must be >= 0");
    const Field& v = logits->value;
    const float h2 = v.spacing * v.spacing;
    const double energy = static_cast<double>(lambda) * h2 * dirichlet_energy(v);
    Field out(1, 1, 1);
    out.values[0] = static_cast<float>(energy);
    NodePtr lp = logits;
    NodePtr node = t.record(std::move(out), {logits}, [lp, lambda, h2](Node& self) {
        if (!lp->requires_grad) return;
        const Field& v = lp->value;
        const float inv_h = 1.0f / v.spacing;
        const float s = lambda * h2 * self.grad.values[0];
        for (int c = 0; c < v.channels; ++c) {
            const float* p = v.plane(c);
            float* g = lp->grad.plane(c);
            for (int i = 0; i < v.rows; ++i) {
                for (int j = 0; j < v.cols; ++j) {
                    std::size_t at = static_cast<std::size_t>(i) * v.cols + j;
                    if (i + 1 < v.rows) {
                        float d = (p[at + static_cast<std::size_t>(v.cols)] - p[at]) * inv_h;
                        float w = s * 2.0f * d * inv_h;
                        g[at + static_cast<std::size_t>(v.cols)] += w;
                        g[at] -= w;
                    }
                    if (j + 1 < v.cols) {
                        float d = (p[at + 1] - p[at]) * inv_h;
                        float w = s * 2.0f * d * inv_h;
                        g[at + 1] += w;
                        g[at] -= w;
                    }
                }
            }
        }
    });
    node->scalar = energy;
    return node;
}

}  // namespace iel::ad
