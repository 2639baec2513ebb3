#include "lefkit/corpus.hpp"
#include "lefkit/runner.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace lefkit;

namespace {

constexpr int exit_pass = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

std::string read_input(const std::string& path)
{
    if (path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text)
{
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << text;
}

const std::map<std::string, std::string>& task_checks()
{
    static const std::map<std::string, std::string> m{
        {"validate", "document builds and every object passes validation"},
        {"cohomology", "dimensions of sheaf cohomology (compact support on locally closed sets)"},
        {"euler", "compactly supported Euler characteristic or Euler integral of a function"},
        {"trace", "alternating trace on cochains equals the trace on cohomology; open-set trace equals the Euler integral of the local trace"},
        {"localize", "both localization routes agree degreewise; closed form; independence of the expanding subspace; shrinking routes; optional line or toric oracle"},
        {"cc", "characteristic cycle from local Morse indices equals the closed form"},
        {"pairing", "index pairing with generic test functions equals the Euler integral"},
        {"verify", "global trace equals the sum of local contributions over fixed components"},
        {"fibered_trace", "trace assembled over base cells, optionally compared with the normal-model integral"},
    };
    return m;
}

std::string explain(const ScenarioDoc& doc, const std::optional<std::string>& only)
{
    auto world = build_world(doc);
    std::ostringstream s;
    s << "scenario " << fnv1a_hex(emit_scenario(doc)) << "\n";
    for (const auto& [name, x] : world->complexes) {
        s << "complex " << name << ": " << x->size() << " cells, dimension " << x->max_dim() << ", chi "
          << x->euler_characteristic() << "\n";
    }
    for (const auto& [name, f] : world->sheaves) {
        s << "sheaf " << name << ": total rank " << f->total_rank() << "\n";
    }
    for (const auto& [name, h] : world->homs) {
        s << "hom " << name << ": " << pointwise_fixed_cells(h->map).size() << " pointwise fixed cells\n";
    }
    for (const auto& [name, m] : world->fibers) {
        s << "fiber_endo " << name << ": dimension " << m->fan().dim() << ", " << m->cone_count() << " cones\n";
    }
    for (const auto& [name, d] : world->models) {
        s << "normal_model " << name << ": " << d->model.cells.size() << " cells, " << d->model.fibers.size()
          << " fibers" << (d->non_characteristic ? ", non-characteristic" : "") << "\n";
    }
    for (const Block* b : world->tasks) {
        if (only && b->name != *only) {
            continue;
        }
        const std::string& kind = as_name(required(*b, "kind"));
        auto it = task_checks().find(kind);
        if (it == task_checks().end()) {
            throw ScenarioError(required(*b, "kind").pos, "unknown task kind '" + kind + "'", task_kinds());
        }
        s << "task " << b->name << " (" << kind << "): " << it->second << "\n";
    }
    return s.str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"lefkit: exact Lefschetz traces of cellular sheaves"};
    app.require_subcommand(1);

    std::string input, out, format = "json", task, family;
    std::uint64_t seed = 1;
    bool timing = false;
    GenerateParams gp;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "text"}));
        c->add_option("--out", out, "write output to this file");
        c->add_option("--seed", seed, "seed for randomized checks");
    };

    auto* validate = app.add_subcommand("validate", "parse and validate a scenario");
    validate->add_option("scenario", input, "scenario file ('-' for stdin)")->required();
    add_common(validate);

    auto* run = app.add_subcommand("run", "run the tasks of a scenario");
    run->add_option("scenario", input, "scenario file ('-' for stdin)")->required();
    run->add_option("--task", task, "run only this task");
    run->add_flag("--timing", timing, "include per-task timing");
    add_common(run);

    auto* gen = app.add_subcommand("generate", "write a generated scenario");
    gen->add_option("family", family, "generator name")->required();
    gen->add_option("--k", gp.k, "sphere example size");
    gen->add_option("--count", gp.count, "instances for random families");
    add_common(gen);

    auto* expl = app.add_subcommand("explain", "describe the objects and what each task checks");
    expl->add_option("scenario", input, "scenario file ('-' for stdin)")->required();
    expl->add_option("--task", task, "explain only this task");
    add_common(expl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_pass : exit_usage;
    }

    const std::optional<std::string> only = task.empty() ? std::nullopt : std::optional<std::string>(task);
    try {
        if (*gen) {
            gp.seed = seed;
            write_output(out, emit_scenario(generate(family, gp)));
            return exit_pass;
        }
        std::string text = read_input(input);
        if (*validate) {
            ScenarioDoc doc = parse_scenario(text);
            build_world(doc);
            if (format == "json") {
                json j{{"version", report_version}, {"scenario_hash", fnv1a_hex(emit_scenario(doc))}, {"valid", true}};
                write_output(out, j.dump(2) + "\n");
            } else {
                write_output(out, "valid " + fnv1a_hex(emit_scenario(doc)) + "\n");
            }
            return exit_pass;
        }
        if (*expl) {
            write_output(out, explain(parse_scenario(text), only));
            return exit_pass;
        }
        RunOptions opt;
        opt.seed = seed;
        opt.only_task = only;
        opt.timing = timing;
        RunReport rep = run_scenario(text, opt);
        write_output(out, format == "json" ? report_json(rep, timing).dump(2) + "\n" : report_text(rep, timing));
        return rep.pass ? exit_pass : exit_fail;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << (input.empty() ? std::string() : input + ":") << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
}
