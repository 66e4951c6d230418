// Copyright (c) 2026, LGEST contributors
// SPDX-License-Identifier: Apache-2.0

#include "lgest/gradcheck_suite.hpp"

#include "lgest/ciem.hpp"
#include "lgest/dsae.hpp"
#include "lgest/fpn.hpp"
#include "lgest/lges.hpp"
#include "lgest/model.hpp"
#include "lgest/ops.hpp"
#include "lgest/parameters.hpp"
#include "lgest/rng.hpp"

namespace lgest {

namespace {

using Inputs = std::vector<Tensor>;
using Fn = std::function<Var(Tape&, std::span<const Var>)>;

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

/// Random fixed linear functional of `out`, so every output entry matters.
Var project(Var out, std::uint64_t seed) {
    Rng rng(seed);
    return sum(mask(out, random_tensor(out.shape(), rng)));
}

GradCheckCase primitive(std::string name, Fn f, std::function<Inputs(Rng&)> make_inputs) {
    const std::uint64_t seed = mix_seed(0x9c, std::hash<std::string>{}(name));
    return {name, false, [f = std::move(f), make_inputs = std::move(make_inputs), seed](const GradCheckOptions& o) {
                Rng rng(seed);
                Inputs inputs = make_inputs(rng);
                return grad_check(
                    [&f, seed](Tape& tape, std::span<const Var> v) { return project(f(tape, v), seed + 1); },
                    std::move(inputs), o);
            }};
}

/// Checks the trainable parameters of a store plus the given inputs.
GradCheckReport check_store(ParameterStore& store, Inputs& inputs, const std::function<Var(Tape&, std::span<const Var>)>& f,
                            const GradCheckOptions& options) {
    std::vector<Tensor*> params = store.trainable();
    for (Tensor& t : inputs) {
        params.push_back(&t);
    }
    const LossBuilder loss = [&](Tape& tape) {
        std::vector<Var> vars;
        for (Tensor& t : inputs) {
            vars.push_back(tape.parameter(t));
        }
        return f(tape, vars);
    };
    return grad_check(loss, params, options);
}

Inputs batch_norm_inputs(Rng& rng) {
    return {random_tensor({3, 2, 2, 2}, rng, -2.0, 2.0), random_tensor({2}, rng, 0.5, 1.5), random_tensor({2}, rng)};
}

std::vector<GradCheckCase> primitives() {
    std::vector<GradCheckCase> cases;
    cases.push_back(primitive(
        "matmul", [](Tape&, std::span<const Var> v) { return matmul(v[0], v[1]); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({4, 2}, r)}; }));
    cases.push_back(primitive(
        "batched_matmul", [](Tape&, std::span<const Var> v) { return batched_matmul(v[0], v[1]); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r), random_tensor({2, 4, 3}, r)}; }));
    cases.push_back(primitive(
        "transpose_last", [](Tape&, std::span<const Var> v) { return transpose_last(v[0]); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r)}; }));
    cases.push_back(primitive(
        "linear", [](Tape&, std::span<const Var> v) { return linear(v[0], v[1], v[2]); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r), random_tensor({4, 5}, r), random_tensor({5}, r)}; }));
    cases.push_back(primitive(
        "add", [](Tape&, std::span<const Var> v) { return add(v[0], v[1]); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "sub", [](Tape&, std::span<const Var> v) { return sub(v[0], v[1]); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "mul", [](Tape&, std::span<const Var> v) { return mul(v[0], v[1]); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r), random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "scale", [](Tape&, std::span<const Var> v) { return scale(v[0], -1.75); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "mask",
        [](Tape&, std::span<const Var> v) {
            Tensor m(v[0].shape());
            for (std::size_t i = 0; i < m.size(); i += 2) {
                m[i] = 1.0;
            }
            return mask(v[0], m);
        },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "leaky_relu", [](Tape&, std::span<const Var> v) { return leaky_relu(v[0]); },
        [](Rng& r) { return Inputs{random_tensor({4, 5}, r)}; }));
    cases.push_back(primitive(
        "sum", [](Tape&, std::span<const Var> v) { return sum(v[0]); },
        [](Rng& r) { return Inputs{random_tensor({3, 4}, r)}; }));
    cases.push_back(primitive(
        "mean_axis", [](Tape&, std::span<const Var> v) { return mean_axis(v[0], 1); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r)}; }));
    cases.push_back(primitive(
        "reshape", [](Tape&, std::span<const Var> v) { return reshape(v[0], {4, 6}); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 4}, r)}; }));
    cases.push_back(primitive(
        "concat_last",
        [](Tape&, std::span<const Var> v) { return concat_last(std::vector<Var>{v[0], v[1], v[2]}); },
        [](Rng& r) {
            return Inputs{random_tensor({3, 2}, r), random_tensor({3, 4}, r), random_tensor({3, 1}, r)};
        }));
    cases.push_back(primitive(
        "nchw_to_tokens", [](Tape&, std::span<const Var> v) { return nchw_to_tokens(v[0]); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 2, 3}, r)}; }));
    cases.push_back(primitive(
        "tokens_to_nchw", [](Tape&, std::span<const Var> v) { return tokens_to_nchw(v[0], 2, 3); },
        [](Rng& r) { return Inputs{random_tensor({2, 6, 3}, r)}; }));
    cases.push_back(primitive(
        "softmax_last", [](Tape&, std::span<const Var> v) { return softmax(v[0], 1); },
        [](Rng& r) { return Inputs{random_tensor({3, 5}, r, -2.0, 2.0)}; }));
    cases.push_back(primitive(
        "softmax_inner", [](Tape&, std::span<const Var> v) { return softmax(v[0], 1); },
        [](Rng& r) { return Inputs{random_tensor({2, 4, 3}, r, -2.0, 2.0)}; }));
    cases.push_back(primitive(
        "layer_norm", [](Tape&, std::span<const Var> v) { return layer_norm(v[0], v[1], v[2]); },
        [](Rng& r) {
            return Inputs{random_tensor({2, 3, 5}, r, -2.0, 2.0), random_tensor({5}, r, 0.5, 1.5),
                          random_tensor({5}, r)};
        }));
    cases.push_back(primitive(
        "batch_norm_train",
        [](Tape&, std::span<const Var> v) {
            // Fresh running statistics per evaluation keep the closure stateless.
            Tensor mean({2}), var = Tensor::full({2}, 1.0), steps({1});
            return batch_norm(v[0], v[1], v[2], {&mean, &var, &steps}, Mode::train);
        },
        batch_norm_inputs));
    cases.push_back(primitive(
        "batch_norm_eval",
        [](Tape&, std::span<const Var> v) {
            Tensor mean({2}, {0.25, -0.5}), var({2}, {1.5, 0.75}), steps({1}, {3.0});
            return batch_norm(v[0], v[1], v[2], {&mean, &var, &steps}, Mode::eval);
        },
        batch_norm_inputs));
    cases.push_back(primitive(
        "conv2d", [](Tape&, std::span<const Var> v) { return conv2d(v[0], v[1], v[2], 1, 1); },
        [](Rng& r) {
            return Inputs{random_tensor({2, 2, 4, 4}, r), random_tensor({3, 2, 3, 3}, r), random_tensor({3}, r)};
        }));
    cases.push_back(primitive(
        "conv2d_strided", [](Tape&, std::span<const Var> v) { return conv2d(v[0], v[1], std::nullopt, 2, 1); },
        [](Rng& r) { return Inputs{random_tensor({2, 2, 5, 5}, r), random_tensor({3, 2, 3, 3}, r)}; }));
    cases.push_back(primitive(
        "deconv2d", [](Tape&, std::span<const Var> v) { return deconv2d(v[0], v[1], v[2], 1, 1); },
        [](Rng& r) {
            return Inputs{random_tensor({2, 3, 4, 4}, r), random_tensor({3, 2, 3, 3}, r), random_tensor({2}, r)};
        }));
    cases.push_back(primitive(
        "deconv2d_strided",
        [](Tape&, std::span<const Var> v) { return deconv2d(v[0], v[1], std::nullopt, 2, 1); },
        [](Rng& r) { return Inputs{random_tensor({2, 3, 3, 3}, r), random_tensor({3, 2, 3, 3}, r)}; }));
    cases.push_back(primitive(
        "cross_entropy",
        [](Tape&, std::span<const Var> v) {
            static const std::vector<std::size_t> labels{0, 2, 1, 2};
            return cross_entropy(v[0], labels);
        },
        [](Rng& r) { return Inputs{random_tensor({4, 3}, r, -2.0, 2.0)}; }));
    cases.push_back(primitive(
        "top2_gate", [](Tape&, std::span<const Var> v) { return top2_gate(v[0], v[1]).weights; },
        [](Rng& r) { return Inputs{random_tensor({5, 3}, r), random_tensor({3, 4}, r, -2.0, 2.0)}; }));
    cases.push_back(primitive(
        "sparse_expert_mix",
        [](Tape&, std::span<const Var> v) {
            static const std::vector<std::array<std::size_t, 2>> selected{{0, 2}, {3, 1}, {2, 3}, {1, 0}};
            const std::vector<Var> weights{v[2], v[3], v[4], v[5]};
            const std::vector<Var> biases{v[6], v[7], v[8], v[9]};
            return sparse_expert_mix(v[0], v[1], selected, weights, biases);
        },
        [](Rng& r) {
            Inputs in{random_tensor({4, 3}, r), random_tensor({4, 4}, r, 0.1, 1.0)};
            for (int j = 0; j < 4; ++j) {
                in.push_back(random_tensor({3, 2}, r));
            }
            for (int j = 0; j < 4; ++j) {
                in.push_back(random_tensor({2}, r));
            }
            return in;
        }));
    return cases;
}

template <typename Build>
GradCheckCase composite(std::string name, Build build) {
    return {std::move(name), true, build};
}

std::vector<GradCheckCase> composites() {
    std::vector<GradCheckCase> cases;
    cases.push_back(composite("cross_attention", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(11);
        CrossAttention attn(store, "ca", 4, 6, 4, rng);
        Inputs in{random_tensor({2, 5, 4}, rng), random_tensor({2, 3, 6}, rng), random_tensor({2, 3, 6}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(attn.forward(t, v[0], v[1], v[2]).output, 12);
        }, o);
    }));
    cases.push_back(composite("rmoe", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(21);
        RmoeLayer layer(store, "rmoe", 4, 4, rng);
        Inputs in{random_tensor({2, 3, 4}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(layer.forward(t, v[0]).output, 22);
        }, o);
    }));
    cases.push_back(composite("ciem", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(31);
        Ciem block(store, "ciem", CiemConfig{.d_q = 6, .d_kv = 4, .d_out = 3, .n_experts = 2}, rng);
        Inputs in{random_tensor({2, 4, 6}, rng), random_tensor({2, 4, 4}, rng), random_tensor({2, 4, 4}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(block.forward(t, v[0], v[1], v[2]).output, 32);
        }, o);
    }));
    cases.push_back(composite("expert_group", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(41);
        ExpertGroup group(store, "eg", ExpertGroupConfig{.n_experts = 4, .d_in = 5, .n_class = 3}, rng);
        Inputs in{random_tensor({4, 5}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(group.forward(t, v[0]).logits, 42);
        }, o);
    }));
    cases.push_back(composite("expert_group_single", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(51);
        ExpertGroup group(store, "eg", ExpertGroupConfig{.n_experts = 1, .d_in = 5, .n_class = 3}, rng);
        Inputs in{random_tensor({4, 5}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(group.forward(t, v[0]).logits, 52);
        }, o);
    }));
    cases.push_back(composite("dsae", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(61);
        Dsae ae(store, "dsae", DsaeConfig{.in_channels = 2, .stem_channels = 4, .depth = 1, .kernel_size = 3}, rng);
        Inputs in{random_tensor({2, 2, 3, 3}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            const DsaeOutput out = ae.forward(t, v[0], Mode::train);
            return add(project(out.reconstruction, 62), project(out.features, 63));
        }, o);
    }));
    cases.push_back(composite("ciem_fpn", [](const GradCheckOptions& o) {
        ParameterStore store;
        Rng rng(71);
        CiemFpn fpn(store, "fpn", FpnConfig{.levels = 2, .base_channels = 8, .n_experts = 2}, rng);
        Inputs in{random_tensor({2, 4, 8}, rng)};
        return check_store(store, in, [&](Tape& t, std::span<const Var> v) {
            return project(fpn_concat(fpn.forward(t, v[0])), 72);
        }, o);
    }));
    cases.push_back(composite("lgest_tiny", [](const GradCheckOptions& o) {
        LgestConfig config;
        config.bands = 3;
        config.n_class = 3;
        config.patch_size = 5;
        config.stem_channels = 8;
        config.dsae_depth = 1;
        config.fpn_levels = 1;
        config.ciem_experts = 2;
        config.local_experts = 2;
        config.global_experts = 2;
        config.seed = 81;
        LgestModel model(config);
        Rng rng(82);
        const Tensor patches = random_tensor({3, 3, 5, 5}, rng, 0.0, 1.0);
        const std::vector<std::size_t> labels{0, 2, 1};
        Inputs none;
        return check_store(model.parameters(), none, [&](Tape& t, std::span<const Var>) {
            const LgesOutput out = model.forward(t, patches, Mode::train);
            return lgest_loss(out.local_logits, out.global_logits, labels, config.lambda, config.beta);
        }, o);
    }));
    return cases;
}

} // namespace

std::vector<GradCheckCase> gradient_suite() {
    std::vector<GradCheckCase> cases = primitives();
    for (GradCheckCase& c : composites()) {
        cases.push_back(std::move(c));
    }
    return cases;
}

GradCheckCase faulty_gradient_case() {
    return primitive(
        "faulty_square",
        [](Tape& tape, std::span<const Var> v) {
            const Tensor& x = v[0].value();
            Tensor y(x.shape());
            for (std::size_t i = 0; i < x.size(); ++i) {
                y[i] = x[i] * x[i];
            }
            const Var in = v[0];
            return tape.record(std::move(y), std::span<const Var>(&in, 1),
                               [&tape, in](std::span<const double> g, const Tensor&) {
                                   std::vector<double> dx(g.size());
                                   const Tensor& xv = in.value();
                                   for (std::size_t i = 0; i < g.size(); ++i) {
                                       dx[i] = 3.0 * xv[i] * g[i]; // should be 2x
                                   }
                                   tape.accumulate(in, dx);
                               },
                               "faulty_square");
        },
        [](Rng& r) { return Inputs{random_tensor({3, 3}, r)}; });
}

std::vector<GradCheckResult> run_gradient_suite(const std::vector<GradCheckCase>& cases, GradCheckOptions options,
                                                const std::function<void(const GradCheckResult&)>& on_result) {
    std::vector<GradCheckResult> results;
    for (const GradCheckCase& c : cases) {
        options.tolerance = c.composite ? kCompositeTolerance : kPrimitiveTolerance;
        GradCheckResult result{c.name, options.tolerance, c.run(options)};
        if (on_result) {
            on_result(result);
        }
        results.push_back(std::move(result));
    }
    return results;
}

} // namespace lgest
