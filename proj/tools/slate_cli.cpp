// slate: constraint-guaranteed scene layout sampling.
//
// Subcommands: check | sample | train | eval | render | gen-scenario.
// Exit codes: 0 success, 1 unsatisfiable spec / failed metric / exhausted
// search budget, 2 input error (bad file, parse error, bad checkpoint).

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <slate/eval.hpp>
#include <slate/layout_io.hpp>
#include <slate/parser.hpp>
#include <slate/policy.hpp>
#include <slate/scenarios.hpp>
#include <slate/search.hpp>
#include <slate/trainer.hpp>

namespace {

using namespace slate;
namespace fs = std::filesystem;

std::string default_out_dir() {
    const char* env = std::getenv("SLATE_OUT_DIR");
    return env && *env ? env : ".";
}

DesignSpec load_spec_file(const std::string& path, unit_t default_min, unit_t default_max) {
    DesignSpec spec = parse(read_text_file(path));
    return expand_default(spec, default_min, default_max);
}

std::unique_ptr<Policy> make_policy(const std::string& checkpoint) {
    if (checkpoint.empty()) return std::make_unique<UniformPolicy>();
    return std::make_unique<GruPolicy>(load_checkpoint(checkpoint));
}

Scenario resolve_scenario(const std::string& arg) {
    if (fs::exists(arg)) return load_scenario_file(arg);
    std::vector<Scenario> all = builtin_scenarios();
    for (Scenario& s : all)
        if (s.name == arg) return std::move(s);
    std::string names;
    for (const Scenario& s : all) names += (names.empty() ? "" : ", ") + s.name;
    throw ScenarioError("unknown scenario '" + arg + "' (built-ins: " + names + ")");
}

int cmd_check(const std::string& spec_path, unit_t dmin, unit_t dmax, long long budget) {
    DesignSpec spec = load_spec_file(spec_path, dmin, dmax);
    std::printf("objects: %zu\n", spec.objects.size());
    std::printf("clauses: %zu\n", top_clauses(spec.constraint).size());
    DomainBox d = spec.initial_domains();
    SatStatus st = satisfiable(spec, to_nnf(spec.constraint), d, budget);
    switch (st) {
    case SatStatus::Sat:
        std::printf("SAT\n");
        return 0;
    case SatStatus::Unsat:
        std::printf("UNSAT\n");
        return 1;
    case SatStatus::BudgetExceeded:
        std::printf("UNKNOWN (search budget exceeded)\n");
        return 1;
    }
    return 2;
}

int cmd_sample(const std::string& spec_path, const std::string& checkpoint, uint64_t seed, int n,
               long long budget, bool svg, const std::string& out_dir, unit_t dmin, unit_t dmax) {
    DesignSpec spec = load_spec_file(spec_path, dmin, dmax);
    std::unique_ptr<Policy> policy = make_policy(checkpoint);
    fs::create_directories(out_dir);
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, 0x5A11, static_cast<uint64_t>(i)));
        Layout layout = sample_layout(spec, *policy, rng, budget);
        LayoutDoc doc = make_layout_doc(spec, layout);
        char name[32];
        std::snprintf(name, sizeof(name), "layout_%04d", i);
        std::string base = (fs::path(out_dir) / name).string();
        write_text_file(base + ".json", layout_to_string(doc));
        std::printf("%s.json\n", base.c_str());
        if (svg) {
            write_text_file(base + ".svg", render_svg(doc));
            std::printf("%s.svg\n", base.c_str());
        }
    }
    return 0;
}

int cmd_train(const std::string& scenario_arg, uint64_t seed, int examples, int hidden,
              int epochs, double lr, int batch, double tf_p, const std::string& checkpoint_out,
              const std::string& resume, const std::string& out_dir) {
    Scenario scn = resolve_scenario(scenario_arg);
    Dataset data = make_dataset(scn, examples, seed);

    PolicyParams params;
    if (!resume.empty()) {
        params = load_checkpoint(resume);
        if (params.class_vocab != scn.class_vocab())
            throw CheckpointError("checkpoint vocabulary does not match scenario '" + scn.name +
                                  "'");
    } else {
        params = PolicyParams::make(hidden, scn.class_vocab());
        params.init_random(derive_seed(seed, 0x1217));
    }

    fs::create_directories(out_dir);
    std::string ckpt_path =
        checkpoint_out.empty() ? (fs::path(out_dir) / (scn.name + ".ckpt.json")).string()
                               : checkpoint_out;
    std::string log_path = (fs::path(out_dir) / (scn.name + ".loss.csv")).string();
    std::ofstream log(log_path, params.trained_epochs > 0 ? std::ios::app : std::ios::trunc);
    if (!log) throw LayoutIoError("cannot open '" + log_path + "' for writing");
    if (params.trained_epochs == 0) log << "epoch,loss\n";

    TrainConfig cfg;
    cfg.lr = lr;
    cfg.batch = batch;
    cfg.epochs = epochs;
    cfg.teacher_forcing_p = tf_p;
    cfg.seed = seed;
    cfg.start_epoch = params.trained_epochs;
    cfg.on_epoch = [&](int epoch, double loss) {
        std::printf("epoch %3d  loss %.6f\n", epoch, loss);
        std::fflush(stdout);
        log << epoch << "," << loss << "\n";
        log.flush();
    };

    TrainStats stats = train(params, data, cfg);
    save_checkpoint(params, ckpt_path);

    double first = stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.front();
    double final = stats.epoch_loss.empty() ? 0.0 : stats.epoch_loss.back();
    std::printf("trained %d epochs on '%s' (%d examples, %zu parameters)\n", epochs,
                scn.name.c_str(), examples, params.param_count());
    std::printf("loss: first %.6f final %.6f\n", first, final);
    std::printf("inputs: %lld teacher-forced, %lld free-running\n", stats.inputs.teacher_forced,
                stats.inputs.free_running);
    std::printf("checkpoint: %s\n", ckpt_path.c_str());
    std::printf("loss log: %s\n", log_path.c_str());
    return 0;
}

int cmd_eval(const std::string& scenario_arg, const std::string& checkpoint, uint64_t seed, int n,
             long long budget) {
    Scenario scn = resolve_scenario(scenario_arg);
    std::unique_ptr<Policy> policy = make_policy(checkpoint);
    if (!checkpoint.empty()) {
        const auto& params = static_cast<const GruPolicy&>(*policy).params();
        if (params.class_vocab != scn.class_vocab())
            throw CheckpointError("checkpoint vocabulary does not match scenario '" + scn.name +
                                  "'");
    }
    EvalResult res = evaluate(*policy, scn, n, seed, budget);
    std::printf("scenario: %s (%d episodes, %s policy)\n", scn.name.c_str(), res.episodes,
                checkpoint.empty() ? "uniform" : "trained");
    std::printf("constraint accuracy: %.3f\n", res.constraint_accuracy);
    std::printf("preference accuracy: %.3f\n", res.preference_accuracy);
    std::printf("%s,%.6f,%.6f\n", scn.name.c_str(), res.preference_accuracy,
                res.constraint_accuracy);
    return res.constraint_accuracy == 1.0 ? 0 : 1;
}

int cmd_render(const std::string& layout_path, const std::string& out_file) {
    LayoutDoc doc = layout_from_string(read_text_file(layout_path));
    std::string svg = render_svg(doc);
    if (out_file.empty()) {
        std::fputs(svg.c_str(), stdout);
    } else {
        write_text_file(out_file, svg);
        std::printf("%s\n", out_file.c_str());
    }
    return 0;
}

int cmd_gen_scenario(const std::string& name, const std::string& out_file) {
    std::vector<Scenario> all = builtin_scenarios();
    std::string text = print_scenario(find_scenario(all, name));
    if (out_file.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_text_file(out_file, text);
        std::printf("%s\n", out_file.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slate: iterative-refinement layout sampling with guaranteed constraints"};
    app.require_subcommand(1);

    std::string spec_path, scenario_arg, layout_path, name;
    std::string checkpoint, resume, out;
    uint64_t seed = 0;
    int n = 0;
    long long budget = -1;
    int hidden = 64, epochs = 100, batch = 8;
    int examples = 2048;
    double lr = 1e-4, tf_p = 0.5;
    unit_t dmin = 256, dmax = 512;
    bool svg = false;

    CLI::App* check = app.add_subcommand("check", "parse a design spec and decide satisfiability");
    check->add_option("spec", spec_path, "design spec file")->required();
    check->add_option("--budget", budget, "search node budget (-1 = unlimited)");
    check->add_option("--default-min", dmin, "minimum extent for default placement");
    check->add_option("--default-max", dmax, "maximum extent for default placement");

    CLI::App* sample = app.add_subcommand("sample", "sample layouts that satisfy a design spec");
    sample->add_option("spec", spec_path, "design spec file")->required();
    sample->add_option("--checkpoint", checkpoint, "policy checkpoint (uniform policy if absent)");
    sample->add_option("--seed", seed, "random seed");
    sample->add_option("--n", n, "number of layouts")->default_val(1);
    sample->add_option("--budget", budget, "search node budget (-1 = unlimited)");
    sample->add_flag("--svg", svg, "also write an SVG per layout");
    sample->add_option("--out", out, "output directory (default $SLATE_OUT_DIR or .)");
    sample->add_option("--default-min", dmin, "minimum extent for default placement");
    sample->add_option("--default-max", dmax, "maximum extent for default placement");

    CLI::App* train = app.add_subcommand("train", "train a policy on a scenario");
    train->add_option("scenario", scenario_arg, "built-in scenario name or scenario file")
        ->required();
    train->add_option("--seed", seed, "random seed");
    train->add_option("--n", examples, "dataset size")->default_val(2048);
    train->add_option("--hidden-size", hidden, "GRU hidden size");
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--batch", batch, "batch size");
    train->add_option("--teacher-forcing", tf_p, "teacher forcing probability");
    train->add_option("--checkpoint", checkpoint, "checkpoint output path");
    train->add_option("--resume", resume, "checkpoint to resume from");
    train->add_option("--out", out, "output directory (default $SLATE_OUT_DIR or .)");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a policy on a scenario");
    eval->add_option("scenario", scenario_arg, "built-in scenario name or scenario file")
        ->required();
    eval->add_option("--checkpoint", checkpoint, "policy checkpoint (uniform policy if absent)");
    eval->add_option("--seed", seed, "random seed");
    eval->add_option("--n", n, "episodes")->default_val(256);
    eval->add_option("--budget", budget, "search node budget (-1 = unlimited)");

    CLI::App* render = app.add_subcommand("render", "render a layout JSON document to SVG");
    render->add_option("layout", layout_path, "layout JSON file")->required();
    render->add_option("--out", out, "SVG output file (stdout if absent)");

    CLI::App* gen = app.add_subcommand("gen-scenario", "write a built-in scenario definition");
    gen->add_option("name", name, "built-in scenario name")->required();
    gen->add_option("--out", out, "output file (stdout if absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        std::string out_dir = out.empty() ? default_out_dir() : out;
        if (check->parsed()) return cmd_check(spec_path, dmin, dmax, budget);
        if (sample->parsed())
            return cmd_sample(spec_path, checkpoint, seed, n, budget, svg, out_dir, dmin, dmax);
        if (train->parsed())
            return cmd_train(scenario_arg, seed, examples, hidden, epochs, lr, batch, tf_p,
                             checkpoint, resume, out_dir);
        if (eval->parsed()) return cmd_eval(scenario_arg, checkpoint, seed, n, budget);
        if (render->parsed()) return cmd_render(layout_path, out);
        if (gen->parsed()) return cmd_gen_scenario(name, out);
    } catch (const UnsatSpecError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const BudgetError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
