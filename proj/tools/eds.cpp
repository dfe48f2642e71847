#include <iostream>

#include <CLI11.hpp>

#include "eds/catalog.hpp"

namespace {

enum Exit { kPass = 0, kFail = 1, kUsage = 2, kNonGeneric = 3 };

struct Options {
    std::string system, example, basepoint;
    std::uint64_t seed = 42;
    int samples = 8;
    double tol = 1e-9;
    bool json = false, long_stage = false, print = false;
};

int emit(const eds::Report& rep, const Options& o) {
    if (o.json)
        std::cout << rep.json().dump(2) << "\n";
    else
        std::cout << rep.text();
    if (rep.facts.contains("non_generic")) return kNonGeneric;
    return rep.pass() ? kPass : kFail;
}

eds::RunOptions run_options(const Options& o, unsigned stages) {
    eds::RunOptions r;
    r.settings.seed = o.seed;
    r.settings.samples = o.samples;
    r.settings.tol_abs = o.tol;
    r.settings.tol_rel = o.tol;
    r.stages = stages;
    r.long_stage = o.long_stage;
    if (!o.basepoint.empty()) r.basepoint = o.basepoint;
    return r;
}

int run_stage(const Options& o, unsigned stages) {
    if (o.system.empty() == o.example.empty()) throw CLI::ValidationError("give exactly one of --system FILE or --example NAME");
    eds::RunOptions r = run_options(o, stages);
    if (!o.example.empty()) return emit(eds::run_entry(o.example, r), o);
    return emit(eds::run_system(eds::load_system(o.system), r), o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Check elliptic Darboux integrable exterior differential systems"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--seed", o.seed, "sampling seed")->capture_default_str();
    app.add_option("--samples", o.samples, "sample points per zero test")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--tol", o.tol, "absolute and relative zero tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_flag("--json", o.json, "machine-readable report");
    app.add_flag("--long", o.long_stage, "run the slow stages (prolonged Cartan-Hilbert symmetries)");

    struct Stage {
        const char* name;
        const char* help;
        unsigned stages;
    };
    const Stage stages[] = {
        {"check", "ellipticity, decomposability and Darboux integrability", eds::StageCheck},
        {"flags", "derived-flag tables", eds::StageFlags},
        {"vessiot", "coframe verification and algebra invariants", eds::StageVessiot},
        {"extend", "group model, action and integrable extension", eds::StageExtend},
        {"solve-verify", "residuals of closed-form solutions", eds::StageSolve},
    };
    unsigned chosen = 0;
    for (const Stage& st : stages) {
        CLI::App* sub = app.add_subcommand(st.name, st.help);
        sub->add_option("--system", o.system, "system-definition file");
        sub->add_option("--example", o.example, "catalog entry");
        if (std::string(st.name) == "vessiot") sub->add_option("--basepoint", o.basepoint, "e.g. \"z=0,xi=0,W=i\"");
        unsigned bits = st.stages;
        sub->callback([&chosen, bits] { chosen = bits; });
    }
    std::string name;
    CLI::App* example = app.add_subcommand("example", "run every check of a catalog entry");
    example->add_option("name", name, "entry name")->required();
    example->add_flag("--print", o.print, "print the entry's system definitions instead");
    CLI::App* list = app.add_subcommand("list-examples", "list catalog entries");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (list->parsed()) {
            for (const eds::CatalogEntry& e : eds::catalog()) std::cout << e.name << "  " << e.summary << "\n";
            return kPass;
        }
        if (example->parsed()) {
            const eds::CatalogEntry& entry = eds::find_entry(name);
            if (o.print) {
                for (const std::string& s : entry.systems) std::cout << s;
                return kPass;
            }
            return emit(eds::run_entry(name, run_options(o, eds::StageAll)), o);
        }
        return run_stage(o, chosen);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "eds: " << e.what() << "\n";
        return kUsage;
    } catch (const eds::NonGeneric& e) {
        std::cerr << "eds: non-generic point: " << e.what() << "\n";
        return kNonGeneric;
    } catch (const eds::DefinitionError& e) {
        std::cerr << "eds: " << e.what() << "\n";
        return kUsage;
    } catch (const eds::Error& e) {
        std::cerr << "eds: " << e.what() << "\n";
        return kUsage;
    }
}
