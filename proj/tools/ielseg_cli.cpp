// ielseg: synthetic segmentation experiments with PDE-derived evolution
// layers between the network and its loss. Every subcommand prints its
// fully resolved configuration (defaults and seeds included) before doing
// anything, so any output can be reproduced from the log alone.

#include "iel/curvemotion.hpp"
#include "iel/data_io.hpp"
#include "iel/diffusion.hpp"
#include "iel/field.hpp"
#include "iel/kernels.hpp"
#include "iel/metrics.hpp"
#include "iel/model.hpp"
#include "iel/oracles.hpp"
#include "iel/rng.hpp"
#include "iel/trainer.hpp"
#include "iel/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <type_traits>
#include <filesystem>
#include <string>
#include <vector>

namespace {

using namespace iel;

void echo(const std::string& key, const std::string& value) {
    std::printf("config: %-10s = %s\n", key.c_str(), value.c_str());
}
void echo(const std::string& key, const char* value) { echo(key, std::string(value)); }
template <typename T>
    requires std::is_integral_v<T>
void echo(const std::string& key, T v) {
    echo(key, std::to_string(v));
}
void echo(const std::string& key, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    echo(key, std::string(buf));
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

int cmd_gen_data(int n, int val_n, int size, int classes, std::uint64_t seed,
                 const std::string& out) {
    echo("command", "gen-data");
    echo("n", n);
    echo("val-n", val_n);
    echo("size", size);
    echo("classes", classes);
    echo("seed", static_cast<long long>(seed));
    echo("out", out);
    Dataset train = gen_synthetic(n, size, classes, seed, "train");
    Dataset val = gen_synthetic(val_n, size, classes, Rng::derive(seed, 0x76616cULL), "val");
    save_dataset(out, train);
    save_dataset(out, val);
    std::printf("wrote %zu train + %zu val samples to %s\n", train.size(), val.size(), out.c_str());
    return 0;
}

int cmd_inject_noise(const std::string& in, int window, float fraction, std::uint64_t seed,
                     const std::string& out) {
    echo("command", "inject-noise");
    echo("in", in);
    echo("window", window);
    echo("fraction", static_cast<double>(fraction));
    echo("seed", static_cast<long long>(seed));
    echo("out", out);
    Dataset train = load_dataset(in, "train");
    NoiseSpec spec{window, fraction, train.clean_masks.empty() ? 2 : train.clean_masks[0].classes,
                   seed};
    inject_dataset_noise(train, spec);
    save_dataset(out, train);
    // the validation split stays clean
    Dataset val = load_dataset(in, "val");
    save_dataset(out, val);
    std::printf("injected %dx%d windows at fraction %g into %zu masks\n", window, window,
                static_cast<double>(fraction), train.size());
    return 0;
}

int cmd_evolve(const std::string& mode, const std::string& pde, float dt, int steps,
               const std::vector<int>& radii, int dilation, int channel, const std::string& in,
               const std::string& out) {
    echo("command", "evolve");
    echo("mode", mode);
    echo("pde", pde);
    echo("dt", static_cast<double>(dt));
    echo("steps", steps);
    if (pde == "curve") {
        echo("radii", join_ints(radii));
        echo("dilation", dilation);
        echo("channel", channel);
    }
    echo("in", in);
    echo("out", out);
    Field u = read_field(in);
    Field result = u;
    if (pde == "heat") {
        DiffusionConfig cfg{dt, steps, u.spacing};
        result = mode == "iel" ? apply_iels(u, cfg) : apply_fels(u, cfg);
    } else {
        CurveMotionConfig cfg{dt, steps, dilation, radii};
        if (mode == "iel") {
            result = run_curve_motion_iels(u, channel, cfg);
        } else {
            // forward curve motion: same concavity set, opposite speed sign,
            // so concave boundaries evolve outward (smoothing)
            cfg.validate();
            for (int n = 0; n < steps; ++n) {
                Field plane(1, result.rows, result.cols, result.spacing);
                std::copy(result.plane(channel), result.plane(channel) + result.plane_size(),
                          plane.values.begin());
                LabelMask c = concave_set(indicator(plane, 0), cfg.radii);
                Field v = speed_field(c, cfg.dilation);
                Field mag = grad_mag_central(plane);
                float* dst = result.plane(channel);
                for (std::size_t t = 0; t < v.values.size(); ++t)
                    dst[t] += dt * (-v.values[t]) * mag.values[t];
            }
        }
    }
    write_field(out, result);
    std::printf("evolved %dx%dx%d field, wrote %s\n", result.channels, result.rows, result.cols,
                out.c_str());
    return 0;
}

int cmd_convexity(const std::string& in, const std::vector<int>& radii, const std::string& out) {
    echo("command", "convexity");
    echo("in", in);
    echo("radii", join_ints(radii));
    echo("out", out);
    LabelMask mask = read_pgm(in);
    // any nonzero id counts as foreground
    LabelMask binary(mask.rows, mask.cols, 2);
    for (std::size_t t = 0; t < mask.ids.size(); ++t) binary.ids[t] = mask.ids[t] != 0 ? 1 : 0;
    LabelMask c = concave_set(binary, radii);
    // violation map: 255 at violating pixels for easy viewing
    LabelMask vis(c.rows, c.cols, 256);
    long long count = 0;
    for (std::size_t t = 0; t < c.ids.size(); ++t) {
        vis.ids[t] = c.ids[t] != 0 ? 255 : 0;
        count += c.ids[t];
    }
    write_pgm(out, vis);
    std::printf("%lld violating pixels, wrote %s\n", count, out.c_str());
    return 0;
}

int cmd_verify(const std::string& suite) {
    echo("command", "verify");
    echo("suite", suite);
    verify::SuiteResult r = verify::run_suite(suite);
    for (const std::string& line : r.lines) std::printf("%s\n", line.c_str());
    std::printf("suite %s: %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL");
    return r.pass ? 0 : 1;
}

int cmd_train(const std::string& variant, float dt, int layers, float lambda,
              const std::vector<int>& radii, int dilation, int epochs, float lr, int batch,
              const std::string& optimizer, std::uint64_t seed, const std::string& data_dir,
              const std::string& out) {
    echo("command", "train");
    echo("variant", variant);
    echo("dt", static_cast<double>(dt));
    echo("layers", layers);
    echo("lambda", static_cast<double>(lambda));
    if (variant == "curve-iel") {
        echo("radii", join_ints(radii));
        echo("dilation", dilation);
    }
    echo("epochs", epochs);
    echo("lr", static_cast<double>(lr));
    echo("batch", batch);
    echo("optimizer", optimizer);
    echo("seed", static_cast<long long>(seed));
    echo("data", data_dir);
    echo("out", out);
    echo("backend", kernels::active().name);

    ExperimentConfig cfg;
    cfg.epochs = epochs;
    cfg.lr = lr;
    cfg.batch = batch;
    cfg.seed = seed;
    cfg.optimizer = optimizer == "sgd" ? ExperimentConfig::Optimizer::sgd
                                       : ExperimentConfig::Optimizer::adam;
    if (variant == "plain") {
        cfg.variant = LossVariant::plain();
    } else if (variant == "iel-heat") {
        cfg.variant = LossVariant::iel_heat(DiffusionConfig{dt, layers, 1.0f});
    } else if (variant == "fel-heat") {
        cfg.variant = LossVariant::fel_heat(DiffusionConfig{dt, layers, 1.0f});
    } else if (variant == "curve-iel") {
        cfg.variant = LossVariant::curve_iel(CurveMotionConfig{dt, layers, dilation, radii});
    } else if (variant == "grad-loss") {
        cfg.variant = LossVariant::grad_penalty(lambda);
    } else if (variant == "l2") {
        cfg.variant = LossVariant::weight_decay(lambda);
    } else {
        std::fprintf(stderr, "unknown variant: %s\n", variant.c_str());
        return 2;
    }

    Dataset train_split = load_dataset(data_dir, "train");
    Dataset val_split = load_dataset(data_dir, "val");
    TrainResult result = train(cfg, train_split, val_split);

    std::filesystem::create_directories(out);
    save_params((std::filesystem::path(out) / "params.fld").string(), result.params);
    write_metrics_csv((std::filesystem::path(out) / "metrics.csv").string(), result.history);
    for (const MetricsRow& row : result.history)
        if (row.split == "val" && row.epoch == epochs - 1)
            std::printf("final val: dice %.4f, miou %.4f, loss %.4f\n", row.dice, row.miou,
                        row.loss);
    std::printf("wrote %s/params.fld and %s/metrics.csv\n", out.c_str(), out.c_str());
    return 0;
}

int cmd_eval(const std::string& params_path, const std::string& data_dir,
             const std::string& split) {
    echo("command", "eval");
    echo("params", params_path);
    echo("data", data_dir);
    echo("split", split);
    ModelParams params = load_params(params_path);
    Dataset ds = load_dataset(data_dir, split);
    MetricsRecord rec = evaluate(params, ds, LossVariant::plain());
    std::printf("dice %.4f, miou %.4f, noise_rate %.4f, loss %.4f over %zu samples\n",
                rec.mean_dice, rec.miou, rec.noise_rate, rec.loss, ds.size());
    return 0;
}

int cmd_bench_merge(int layers, float dt, int size) {
    echo("command", "bench-merge");
    echo("layers", layers);
    echo("dt", static_cast<double>(dt));
    echo("size", size);
    echo("backend", kernels::active().name);
    verify::MergeBench b = verify::bench_merge(layers, dt, size);
    std::printf("layers,dt,size,sequential_ms,merged_ms,max_rel_diff\n");
    std::printf("%d,%g,%d,%.4f,%.4f,%.3e\n", layers, static_cast<double>(dt), size,
                b.sequential_ms, b.merged_ms, b.max_rel_diff);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDE evolution layers for segmentation: data, training, verification"};
    app.require_subcommand(1);

    // gen-data
    int n = 200, val_n = 50, size = 64, classes = 2;
    std::uint64_t seed = 7;
    std::string out_dir = "data";
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    gen->add_option("--n", n, "training samples")->capture_default_str();
    gen->add_option("--val-n", val_n, "validation samples")->capture_default_str();
    gen->add_option("--size", size, "image size (multiple of 4)")->capture_default_str();
    gen->add_option("--classes", classes, "number of classes")->capture_default_str();
    gen->add_option("--seed", seed, "generator seed")->capture_default_str();
    gen->add_option("--out", out_dir, "output directory")->required();

    // inject-noise
    std::string in_dir = "data";
    int window = 2;
    float fraction = 0.1f;
    std::uint64_t noise_seed = 7;
    std::string noise_out = "data_noisy";
    auto* inject = app.add_subcommand("inject-noise", "corrupt training labels with window noise");
    inject->add_option("--in", in_dir, "input dataset directory")->required();
    inject->add_option("--window", window, "window side k")->capture_default_str();
    inject->add_option("--fraction", fraction, "target corrupted-area fraction")->capture_default_str();
    inject->add_option("--seed", noise_seed, "noise seed")->capture_default_str();
    inject->add_option("--out", noise_out, "output directory")->required();

    // evolve
    std::string ev_mode = "iel", ev_pde = "heat", ev_in, ev_out;
    float ev_dt = 0.1f;
    int ev_steps = 20, ev_dilation = 3, ev_channel = 0;
    std::vector<int> ev_radii = {5, 10, 15};
    auto* evolve = app.add_subcommand("evolve", "apply evolution layers to a stored field");
    evolve->add_option("--mode", ev_mode, "fel|iel")->check(CLI::IsMember({"fel", "iel"}))->capture_default_str();
    evolve->add_option("--pde", ev_pde, "heat|curve")->check(CLI::IsMember({"heat", "curve"}))->capture_default_str();
    evolve->add_option("--dt", ev_dt, "time step")->capture_default_str();
    evolve->add_option("--steps", ev_steps, "number of steps")->capture_default_str();
    evolve->add_option("--radii", ev_radii, "curve: probe radii")->delimiter(',')->capture_default_str();
    evolve->add_option("--dilation", ev_dilation, "curve: speed dilation d")->capture_default_str();
    evolve->add_option("--channel", ev_channel, "curve: level-set channel")->capture_default_str();
    evolve->add_option("--in", ev_in, "input FLD1 field")->required();
    evolve->add_option("--out", ev_out, "output FLD1 field")->required();

    // convexity
    std::string cx_in, cx_out;
    std::vector<int> cx_radii = {5, 10, 15};
    auto* convexity = app.add_subcommand("convexity", "write the convexity-violation map of a mask");
    convexity->add_option("--in", cx_in, "input PGM mask")->required();
    convexity->add_option("--radii", cx_radii, "probe radii")->delimiter(',')->capture_default_str();
    convexity->add_option("--out", cx_out, "output PGM violation map")->required();

    // verify
    std::string suite;
    auto* verify_cmd = app.add_subcommand("verify", "run a property suite, nonzero exit on failure");
    verify_cmd->add_option("--suite", suite, "energy|merge|adjoint|gradcheck|theorem2|convex-oracle")
        ->required()
        ->check(CLI::IsMember(iel::verify::suite_names()));

    // train
    std::string tr_variant = "plain", tr_data, tr_out = "run";
    float tr_dt = 0.1f, tr_lambda = 1.0f, tr_lr = 3e-3f;
    int tr_layers = 10, tr_epochs = 30, tr_batch = 1, tr_dilation = 3;
    std::uint64_t tr_seed = 7;
    std::vector<int> tr_radii = {5, 10, 15};
    auto* train_cmd = app.add_subcommand("train", "train the small segmentation net");
    train_cmd->add_option("--variant", tr_variant, "plain|iel-heat|fel-heat|curve-iel|grad-loss|l2")
        ->check(CLI::IsMember({"plain", "iel-heat", "fel-heat", "curve-iel", "grad-loss", "l2"}))
        ->capture_default_str();
    train_cmd->add_option("--dt", tr_dt, "evolution time step")->capture_default_str();
    train_cmd->add_option("--layers", tr_layers, "evolution layers / curve steps")->capture_default_str();
    train_cmd->add_option("--lambda", tr_lambda, "penalty weight (grad-loss, l2)")->capture_default_str();
    train_cmd->add_option("--radii", tr_radii, "curve-iel probe radii")->delimiter(',')->capture_default_str();
    train_cmd->add_option("--dilation", tr_dilation, "curve-iel dilation")->capture_default_str();
    train_cmd->add_option("--epochs", tr_epochs, "training epochs")->capture_default_str();
    train_cmd->add_option("--lr", tr_lr, "learning rate")->capture_default_str();
    std::string tr_optimizer = "adam";
    train_cmd->add_option("--optimizer", tr_optimizer, "adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    train_cmd->add_option("--batch", tr_batch, "batch size")->capture_default_str();
    train_cmd->add_option("--seed", tr_seed, "experiment seed")->capture_default_str();
    train_cmd->add_option("--data", tr_data, "dataset directory")->required();
    train_cmd->add_option("--out", tr_out, "output directory")->capture_default_str();

    // eval
    std::string ev_params, ev_data, ev_split = "val";
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--params", ev_params, "checkpoint file")->required();
    eval_cmd->add_option("--data", ev_data, "dataset directory")->required();
    eval_cmd->add_option("--split", ev_split, "split to evaluate")->capture_default_str();

    // bench-merge
    int bm_layers = 10, bm_size = 64;
    float bm_dt = 0.1f;
    auto* bench = app.add_subcommand("bench-merge", "time stacked layers against the merged form");
    bench->add_option("--layers", bm_layers, "layer count")->capture_default_str();
    bench->add_option("--dt", bm_dt, "time step")->capture_default_str();
    bench->add_option("--size", bm_size, "field side length")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2
    }

    try {
        if (gen->parsed()) return cmd_gen_data(n, val_n, size, classes, seed, out_dir);
        if (inject->parsed()) return cmd_inject_noise(in_dir, window, fraction, noise_seed, noise_out);
        if (evolve->parsed())
            return cmd_evolve(ev_mode, ev_pde, ev_dt, ev_steps, ev_radii, ev_dilation, ev_channel,
                              ev_in, ev_out);
        if (convexity->parsed()) return cmd_convexity(cx_in, cx_radii, cx_out);
        if (verify_cmd->parsed()) return cmd_verify(suite);
        if (train_cmd->parsed())
            return cmd_train(tr_variant, tr_dt, tr_layers, tr_lambda, tr_radii, tr_dilation,
                             tr_epochs, tr_lr, tr_batch, tr_optimizer, tr_seed, tr_data, tr_out);
        if (eval_cmd->parsed()) return cmd_eval(ev_params, ev_data, ev_split);
        if (bench->parsed()) return cmd_bench_merge(bm_layers, bm_dt, bm_size);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
