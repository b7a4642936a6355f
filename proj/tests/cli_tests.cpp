// End-to-end tests that drive the installed binary the way a user would:
// every case shells out, then inspects exit codes, stdout and artifacts.

#include <catch2/catch_amalgamated.hpp>

#include <slate/eval.hpp>
#include <slate/layout_io.hpp>
#include <slate/parser.hpp>
#include <slate/scenarios.hpp>
#include <slate/trainer.hpp>

#include <cstdio>
#include <filesystem>
#include <string>

using namespace slate;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

RunResult run(const std::string& args, const std::string& env = "") {
    std::string cmd = env + (env.empty() ? "" : " ") + SLATE_BIN_PATH + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    while (size_t got = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, got);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::path("cli_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string spec_file(const fs::path& dir, const std::string& name, const std::string& text) {
    fs::path p = dir / name;
    write_text_file(p.string(), text);
    return p.string();
}

constexpr const char* kKitchenSpec =
    "# kitchen wall: fixtures pinned, appliances placed by default rules\n"
    "given(0, \"sink\", 100, 450, 250, 120)\n"
    "& given(1, \"oven\", 400, 450, 300, 200)\n"
    "& type(2, \"microwave\") & default(2)\n"
    "& type(3, \"toaster\") & default(3)\n"
    "& cright(2, 1)\n"
    "& cleft(3, 1)\n"
    "& cbelow(3, 0)\n";

} // namespace

TEST_CASE("the top-level interface reports usage") {
    REQUIRE(run("").exit_code == 2);
    RunResult help = run("--help");
    REQUIRE(help.exit_code == 0);
    REQUIRE(help.output.find("sample") != std::string::npos);
    REQUIRE(help.output.find("train") != std::string::npos);
    REQUIRE(run("frobnicate").exit_code == 2);
}

TEST_CASE("check decides satisfiability with matching exit codes") {
    fs::path dir = scratch("check");
    std::string sat = spec_file(dir, "sat.spec", "cleft(1, 2) & taller_value(1, 100)\n");
    std::string unsat = spec_file(dir, "unsat.spec", "left_value(1, 100) & right_value(1, 200)\n");
    std::string broken = spec_file(dir, "broken.spec", "cleft(1, )\n");

    RunResult ok = run("check " + sat);
    REQUIRE(ok.exit_code == 0);
    REQUIRE(ok.output.find("objects: 2") != std::string::npos);
    REQUIRE(ok.output.find("clauses: 2") != std::string::npos);
    REQUIRE(ok.output.find("\nSAT\n") != std::string::npos);

    RunResult no = run("check " + unsat);
    REQUIRE(no.exit_code == 1);
    REQUIRE(no.output.find("\nUNSAT\n") != std::string::npos);

    RunResult limited = run("check " + sat + " --budget 0");
    REQUIRE(limited.exit_code == 1);
    REQUIRE(limited.output.find("UNKNOWN") != std::string::npos);

    RunResult bad = run("check " + broken);
    REQUIRE(bad.exit_code == 2);
    REQUIRE(bad.output.find("error:") != std::string::npos);
    REQUIRE(bad.output.find("line 1") != std::string::npos);

    REQUIRE(run("check " + (dir / "missing.spec").string()).exit_code == 2);
}

TEST_CASE("sample writes valid layout documents deterministically") {
    fs::path dir = scratch("sample");
    std::string spec_path =
        spec_file(dir, "pair.spec", "cleft(1, 2) & taller_value(1, 100) & type(2, \"lamp\")\n");
    DesignSpec spec = expand_default(parse(read_text_file(spec_path)));

    RunResult r = run("sample " + spec_path + " --n 2 --seed 5 --out " + (dir / "a").string());
    REQUIRE(r.exit_code == 0);

    for (int i = 0; i < 2; ++i) {
        fs::path json = dir / "a" / ("layout_000" + std::to_string(i) + ".json");
        REQUIRE(r.output.find(json.string()) != std::string::npos);
        LayoutDoc doc = layout_from_string(read_text_file(json.string()));
        REQUIRE(doc.objects.size() == 2);
        REQUIRE(doc.objects[1].type == "lamp");
        Layout layout{doc.objects[0].bbox, doc.objects[1].bbox};
        REQUIRE(eval_point(spec, spec.constraint, layout));
        REQUIRE(layout[0].x + layout[0].w < layout[1].x);
        REQUIRE(layout[0].h > 100);
    }

    // an identical invocation reproduces the bytes exactly
    RunResult again =
        run("sample " + spec_path + " --n 2 --seed 5 --out " + (dir / "b").string());
    REQUIRE(again.exit_code == 0);
    REQUIRE(read_text_file((dir / "a" / "layout_0000.json").string()) ==
            read_text_file((dir / "b" / "layout_0000.json").string()));
    REQUIRE(read_text_file((dir / "a" / "layout_0001.json").string()) ==
            read_text_file((dir / "b" / "layout_0001.json").string()));

    // a different seed gives a different first layout
    RunResult other =
        run("sample " + spec_path + " --n 1 --seed 6 --out " + (dir / "c").string());
    REQUIRE(other.exit_code == 0);
    REQUIRE(read_text_file((dir / "a" / "layout_0000.json").string()) !=
            read_text_file((dir / "c" / "layout_0000.json").string()));

    // n = 0 is a no-op
    RunResult none = run("sample " + spec_path + " --n 0 --out " + (dir / "d").string());
    REQUIRE(none.exit_code == 0);
    REQUIRE(!fs::exists(dir / "d" / "layout_0000.json"));
}

TEST_CASE("sample honors the svg flag and the output environment variable") {
    fs::path dir = scratch("sample_svg");
    std::string spec_path = spec_file(dir, "one.spec", "xeq_value(1, 200) & yeq_value(1, 300)\n");

    RunResult r = run("sample " + spec_path + " --n 1 --seed 1 --svg --out " + dir.string());
    REQUIRE(r.exit_code == 0);
    std::string svg = read_text_file((dir / "layout_0000.svg").string());
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(svg.find("<rect x=\"200\" y=\"300\"") != std::string::npos);

    fs::path env_dir = dir / "from_env";
    RunResult e = run("sample " + spec_path + " --n 1 --seed 1",
                      "SLATE_OUT_DIR=" + env_dir.string());
    REQUIRE(e.exit_code == 0);
    REQUIRE(fs::exists(env_dir / "layout_0000.json"));
}

TEST_CASE("sampling an unsatisfiable spec fails with exit code 1") {
    fs::path dir = scratch("sample_unsat");
    std::string spec_path = spec_file(dir, "bad.spec", "cleft(1, 2) & cleft(2, 1)\n");
    RunResult r = run("sample " + spec_path + " --n 1 --out " + dir.string());
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.output.find("error:") != std::string::npos);
    REQUIRE(!fs::exists(dir / "layout_0000.json"));
}

TEST_CASE("train writes checkpoints and loss logs, and resumes cleanly") {
    fs::path dir = scratch("train");
    std::string ckpt = (dir / "p.ckpt.json").string();
    std::string base = "train basic --n 4 --hidden-size 6 --epochs 2 --batch 2 --seed 3 "
                       "--checkpoint " +
                       ckpt + " --out " + dir.string();

    RunResult r = run(base);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("epoch   0") != std::string::npos);
    REQUIRE(r.output.find("epoch   1") != std::string::npos);
    REQUIRE(r.output.find("trained 2 epochs on 'basic'") != std::string::npos);

    PolicyParams params = load_checkpoint(ckpt);
    REQUIRE(params.hidden == 6);
    REQUIRE(params.trained_epochs == 2);
    REQUIRE(params.class_vocab == std::vector<std::string>{"obj1", "obj2"});

    std::string log = read_text_file((dir / "basic.loss.csv").string());
    REQUIRE(log.rfind("epoch,loss\n", 0) == 0);
    REQUIRE(log.find("\n0,") != std::string::npos);
    REQUIRE(log.find("\n1,") != std::string::npos);

    // resuming continues the epoch numbering and appends to the log
    RunResult more = run("train basic --n 4 --epochs 2 --batch 2 --seed 3 --resume " + ckpt +
                         " --checkpoint " + ckpt + " --out " + dir.string());
    REQUIRE(more.exit_code == 0);
    REQUIRE(more.output.find("epoch   2") != std::string::npos);
    REQUIRE(more.output.find("epoch   3") != std::string::npos);
    REQUIRE(load_checkpoint(ckpt).trained_epochs == 4);
    std::string log2 = read_text_file((dir / "basic.loss.csv").string());
    REQUIRE(log2.find("\n3,") != std::string::npos);
    REQUIRE(log2.rfind("epoch,loss") == 0); // header written once

    // the resumed vocabulary must match the scenario
    RunResult clash = run("train tight --n 4 --epochs 1 --resume " + ckpt + " --out " +
                          dir.string());
    REQUIRE(clash.exit_code == 2);
    REQUIRE(clash.output.find("vocabulary") != std::string::npos);
}

TEST_CASE("train rejects unknown scenarios and lists the built-ins") {
    RunResult r = run("train volcano --epochs 1");
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.output.find("unknown scenario 'volcano'") != std::string::npos);
    REQUIRE(r.output.find("basic, tight, complex") != std::string::npos);
}

TEST_CASE("train accepts a scenario definition file") {
    fs::path dir = scratch("train_file");
    std::string text;
    {
        RunResult gen = run("gen-scenario basic");
        REQUIRE(gen.exit_code == 0);
        text = gen.output;
    }
    fs::path scn = dir / "mine.scn";
    write_text_file(scn.string(), text);
    RunResult r = run("train " + scn.string() + " --n 2 --hidden-size 4 --epochs 1 --batch 2 " +
                      "--out " + dir.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(dir / "basic.ckpt.json")); // file still names the scenario 'basic'
}

TEST_CASE("eval prints a machine-readable result line") {
    RunResult r = run("eval basic --n 20 --seed 11");
    REQUIRE(r.exit_code == 0); // constraints hold by construction
    REQUIRE(r.output.find("scenario: basic (20 episodes, uniform policy)") != std::string::npos);

    // last line: name,preference_accuracy,constraint_accuracy
    size_t nl = r.output.find_last_of('\n', r.output.size() - 2);
    std::string last = r.output.substr(nl + 1);
    REQUIRE(last.rfind("basic,", 0) == 0);
    REQUIRE(last.find(",1.000000") == last.size() - 10u);

    double pref = std::stod(last.substr(6, last.find(',', 6) - 6));
    REQUIRE(pref >= 0.0);
    REQUIRE(pref <= 1.0);

    // identical seeds evaluate identically
    REQUIRE(run("eval basic --n 20 --seed 11").output == r.output);

    REQUIRE(run("eval volcano").exit_code == 2);
}

TEST_CASE("eval loads checkpoints and rejects vocabulary mismatches") {
    fs::path dir = scratch("eval_ckpt");
    std::string ckpt = (dir / "p.ckpt.json").string();
    REQUIRE(run("train basic --n 2 --hidden-size 4 --epochs 1 --batch 2 --seed 1 --checkpoint " +
                ckpt + " --out " + dir.string())
                .exit_code == 0);

    RunResult r = run("eval basic --n 5 --seed 2 --checkpoint " + ckpt);
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.output.find("trained policy") != std::string::npos);

    RunResult clash = run("eval tight --n 5 --checkpoint " + ckpt);
    REQUIRE(clash.exit_code == 2);
    REQUIRE(clash.output.find("vocabulary") != std::string::npos);

    std::string junk = (dir / "junk.ckpt.json").string();
    write_text_file(junk, "{}");
    REQUIRE(run("eval basic --n 5 --checkpoint " + junk).exit_code == 2);
}

TEST_CASE("render converts layout documents to svg") {
    fs::path dir = scratch("render");
    std::string spec_path = spec_file(dir, "one.spec", "xeq_value(1, 40) & yeq_value(1, 60)\n");
    REQUIRE(run("sample " + spec_path + " --n 1 --seed 4 --out " + dir.string()).exit_code == 0);
    std::string layout = (dir / "layout_0000.json").string();

    std::string svg_path = (dir / "out.svg").string();
    RunResult to_file = run("render " + layout + " --out " + svg_path);
    REQUIRE(to_file.exit_code == 0);
    std::string svg = read_text_file(svg_path);
    REQUIRE(svg.rfind("<svg", 0) == 0);
    REQUIRE(svg.find("<rect x=\"40\" y=\"60\"") != std::string::npos);

    RunResult to_stdout = run("render " + layout);
    REQUIRE(to_stdout.exit_code == 0);
    REQUIRE(to_stdout.output == svg);

    std::string junk = spec_file(dir, "junk.json", "{ nope");
    REQUIRE(run("render " + junk).exit_code == 2);
}

TEST_CASE("gen-scenario emits definitions that parse back") {
    for (const char* name : {"basic", "tight", "complex"}) {
        RunResult r = run(std::string("gen-scenario ") + name);
        REQUIRE(r.exit_code == 0);
        Scenario s = parse_scenario(r.output);
        REQUIRE(s.name == name);
    }
    fs::path dir = scratch("gen");
    std::string out = (dir / "tight.scn").string();
    RunResult r = run("gen-scenario tight --out " + out);
    REQUIRE(r.exit_code == 0);
    REQUIRE(parse_scenario(read_text_file(out)).num_objects == 3);
    REQUIRE(run("gen-scenario volcano").exit_code == 2);
}

TEST_CASE("a pinned-fixture spec flows through check, sample and render") {
    fs::path dir = scratch("kitchen");
    std::string spec_path = spec_file(dir, "kitchen.spec", kKitchenSpec);

    RunResult chk = run("check " + spec_path);
    REQUIRE(chk.exit_code == 0);
    REQUIRE(chk.output.find("objects: 4") != std::string::npos);
    REQUIRE(chk.output.find("\nSAT\n") != std::string::npos);

    RunResult smp =
        run("sample " + spec_path + " --n 3 --seed 9 --svg --out " + (dir / "out").string());
    REQUIRE(smp.exit_code == 0);

    DesignSpec spec = expand_default(parse(kKitchenSpec));
    for (int i = 0; i < 3; ++i) {
        fs::path json = dir / "out" / ("layout_000" + std::to_string(i) + ".json");
        LayoutDoc doc = layout_from_string(read_text_file(json.string()));
        REQUIRE(doc.objects.size() == 4);
        Layout layout;
        for (const auto& o : doc.objects) layout.push_back(o.bbox);

        // fixtures appear verbatim
        REQUIRE(layout[0] == BoundingBox{100, 450, 250, 120});
        REQUIRE(layout[1] == BoundingBox{400, 450, 300, 200});
        REQUIRE(doc.objects[0].type == "sink");
        REQUIRE(doc.objects[2].type == "microwave");

        // appliances follow the relations and the default sizing
        REQUIRE(layout[2].x > 700);
        REQUIRE(layout[3].x + layout[3].w < 400);
        REQUIRE(layout[3].y > 570);
        for (size_t o : {size_t{2}, size_t{3}}) {
            REQUIRE(layout[o].w >= 256);
            REQUIRE(layout[o].w <= 512);
            REQUIRE(layout[o].h >= 256);
            REQUIRE(layout[o].h <= 512);
            REQUIRE(layout[o].x + layout[o].w <= 1000);
            REQUIRE(layout[o].y + layout[o].h <= 1000);
        }
        REQUIRE(eval_point(spec, spec.constraint, layout));
    }

    // custom default sizing bounds are honored
    RunResult tiny = run("sample " + spec_path +
                         " --n 1 --seed 2 --default-min 100 --default-max 200 --out " +
                         (dir / "tiny").string());
    REQUIRE(tiny.exit_code == 0);
    LayoutDoc doc =
        layout_from_string(read_text_file((dir / "tiny" / "layout_0000.json").string()));
    for (size_t o : {size_t{2}, size_t{3}}) {
        REQUIRE(doc.objects[o].bbox.w >= 100);
        REQUIRE(doc.objects[o].bbox.w <= 200);
        REQUIRE(doc.objects[o].bbox.h >= 100);
        REQUIRE(doc.objects[o].bbox.h <= 200);
    }
}
