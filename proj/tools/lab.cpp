// lab: experiment runner for the M_2(F_q) sum-product toolkit.
//
//   lab <experiment> --q <p[^k]> [--set-a <file|construction:...|random:size:seed[:gl2]>]
//       [--trials N] [--size N] [--seed N] [--variant left|right] [--m M]
//       [--x list] [--g list] [--out path] [--format json|csv] [--config file]
//   lab list
//
// Exit code 0 iff every exact assertion in the report passed.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "m2sp/experiments.hpp"

using namespace m2sp;

int main(int argc, char** argv) {
    CLI::App app{"m2sp experiment runner"};
    app.get_formatter()->column_width(34);

    std::string experiment;
    app.add_option("experiment", experiment,
                   "experiment name from the catalog, or 'list' to enumerate")
        ->required();

    std::string q, variant, out_path, format = "json", config_path;
    std::string set_a, set_b, set_c, set_d, set_e, set_f, xlist, glist;
    i64 trials = -1, size = -1, seed = -1;
    double m_param = -1;

    auto* oq = app.add_option("--q", q, "field order p or p^k (q <= 27)");
    auto* otrials = app.add_option("--trials", trials, "number of trials");
    auto* osize = app.add_option("--size", size, "per-set sample size");
    auto* oseed = app.add_option("--seed", seed, "rng seed");
    auto* ovariant = app.add_option("--variant", variant, "product variant: left | right");
    auto* om = app.add_option("--m", m_param, "decomposition parameter M");
    auto* ox = app.add_option("--x", xlist, "comma-separated X values in F_q");
    auto* og = app.add_option("--g", glist, "comma-separated subgroup of F_q^*");
    auto* oa = app.add_option("--set-a", set_a, "set source for A");
    auto* ob = app.add_option("--set-b", set_b, "set source for B");
    auto* oc = app.add_option("--set-c", set_c, "set source for C");
    auto* od = app.add_option("--set-d", set_d, "set source for D");
    auto* oe = app.add_option("--set-e", set_e, "set source for E");
    auto* of = app.add_option("--set-f", set_f, "set source for F");
    std::string set_out;
    auto* oso = app.add_option("--set-out", set_out, "target path for emit_set");
    app.add_option("--out", out_path, "write the report to this path");
    app.add_option("--format", format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--config", config_path, "JSON config file (flags take precedence)");

    CLI11_PARSE(app, argc, argv);

    if (experiment == "list") {
        for (const CatalogEntry& e : experiment_catalog())
            std::cout << "  " << e.name << std::string(24 - std::min<size_t>(23, e.name.size()), ' ')
                      << e.summary << "\n";
        return 0;
    }

    try {
        json cfg = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) fail(Errc::IoFailure, "cannot open config " + config_path);
            try {
                in >> cfg;
            } catch (const json::exception& e) {
                fail(Errc::ConfigInvalid, std::string("config parse: ") + e.what());
            }
            if (!cfg.is_object()) fail(Errc::ConfigInvalid, "config must be a JSON object");
        }
        // flags > config file > experiment defaults
        auto put_str = [&](CLI::Option* opt, const char* key, const std::string& v) {
            if (opt->count()) cfg[key] = v;
        };
        put_str(oq, "q", q);
        put_str(ovariant, "variant", variant);
        put_str(ox, "x", xlist);
        put_str(og, "g", glist);
        put_str(oa, "set-a", set_a);
        put_str(ob, "set-b", set_b);
        put_str(oc, "set-c", set_c);
        put_str(od, "set-d", set_d);
        put_str(oe, "set-e", set_e);
        put_str(of, "set-f", set_f);
        put_str(oso, "set-out", set_out);
        if (otrials->count()) cfg["trials"] = trials;
        if (osize->count()) cfg["size"] = size;
        if (oseed->count()) cfg["seed"] = seed;
        if (om->count()) cfg["m"] = m_param;

        ExperimentReport report = run_experiment(experiment, cfg);

        if (!out_path.empty()) emit_report(report, format, out_path);
        json summary = report_to_json(report);
        summary.erase("trials");  // keep stdout short; full rows go to --out
        std::cout << summary.dump(2) << "\n";
        if (!report.all_passed()) {
            std::cerr << "FAIL: an exact assertion did not hold\n";
            return 1;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
