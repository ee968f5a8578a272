#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>

#include "dopi/adapters.hpp"
#include "dopi/codec.hpp"
#include "dopi/dialogue.hpp"
#include "dopi/error.hpp"
#include "dopi/eval.hpp"
#include "dopi/service.hpp"
#include "dopi/synthetic.hpp"
#include "dopi/text.hpp"

#ifndef DOPI_DATA_DIR
#define DOPI_DATA_DIR "data"
#endif

namespace {

using namespace dopi;
namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit_error(const std::string& code, const std::string& message) {
    std::cerr << nlohmann::json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

struct Resources {
    std::string aliases;
    std::string cues;
    std::string advice;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--aliases", aliases, "alias table (JSON)");
        cmd->add_option("--cues", cues, "cue lexicon (JSON)");
        cmd->add_option("--advice", advice, "advice templates (JSON)");
    }

    RuleBasedGuidance guidance(const KnowledgeGraph& g) const {
        auto table = aliases.empty() ? TermAliasTable{} : TermAliasTable::load(aliases);
        table.bind(g);
        return {std::move(table), CueLexicon::load(cues.empty() ? fs::path(DOPI_DATA_DIR) / "cues_en.json" : fs::path(cues))};
    }
    PatientVoice voice(const KnowledgeGraph& g) const {
        auto rg = guidance(g);
        return {rg.table(), rg.lexicon()};
    }
    RuleBasedExpert expert() const {
        return RuleBasedExpert(advice.empty() ? AdviceTemplates{} : AdviceTemplates::load(advice));
    }
};

std::string graph_path_or_env(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv("DOPI_GRAPH"); env && *env) return env;
    throw UsageError("no graph given and DOPI_GRAPH is not set");
}

EngineConfig engine_config(const std::string& file) {
    EngineConfig c;
    if (!file.empty()) {
        try {
            apply_overrides(c, nlohmann::json::parse(read_file(file)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(file + ": " + e.what());
        }
    }
    c.validate();
    return c;
}

std::vector<PolicySpec> parse_policies(const std::string& list, std::optional<double> misjudgment) {
    std::vector<PolicySpec> out;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        PolicySpec spec;
        try {
            spec.id = policy_from_string(item);
        } catch (const DataError& e) {
            throw UsageError(e.what());
        }
        spec.misjudgment_rate = misjudgment;
        out.push_back(std::move(spec));
    }
    if (out.empty()) throw UsageError("--policies is empty");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph driven medical interrogation engine"};
    app.require_subcommand(1);
    Resources res;

    auto* build = app.add_subcommand("build-graph", "build a knowledge graph from case records");
    std::string cases_path, out_path;
    double smoothing = 0.0;
    bool links = false;
    build->add_option("cases", cases_path, "case file (JSON array or JSON Lines)")->required();
    build->add_option("out", out_path, "graph file to write")->required();
    build->add_option("--smoothing", smoothing, "additive smoothing for edge weights");
    build->add_flag("--links", links, "also derive symptom-symptom links");

    auto* gen = app.add_subcommand("gen-dialogues", "synthesize a dialogue corpus");
    std::string graph_path, config_path, corpus_id = "corpus";
    bool low_info = false;
    std::uint64_t seed = 0;
    std::size_t disclosure = 2;
    double misjudgment = 0.0;
    unsigned threads = 1;
    gen->add_option("graph", graph_path)->required();
    gen->add_option("cases", cases_path)->required();
    gen->add_option("out", out_path, "corpus directory")->required();
    gen->add_flag("--low-info", low_info, "also write the low-information split to <out>/low_information");
    gen->add_option("--seed", seed);
    gen->add_option("--disclosure", disclosure, "symptoms volunteered in the initial complaint");
    gen->add_option("--misjudgment", misjudgment, "probability of a flipped answer");
    gen->add_option("--config", config_path, "engine config overrides (JSON)");
    gen->add_option("--corpus-id", corpus_id);
    gen->add_option("--threads", threads);
    res.add_options(gen);

    auto* eval = app.add_subcommand("eval", "benchmark policies on a corpus");
    std::string corpus_path, policies = "dopi,greedy_no_noise,random_question,no_question", report_path;
    std::optional<std::uint64_t> eval_seed;
    std::optional<double> eval_misjudgment;
    eval->add_option("graph", graph_path)->required();
    eval->add_option("corpus", corpus_path, "corpus directory")->required();
    eval->add_option("--policies", policies, "comma-separated policy ids");
    eval->add_option("--seed", eval_seed, "derive per-case seeds from this value instead of the corpus");
    eval->add_option("--misjudgment", eval_misjudgment, "override the simulator's misjudgment rate");
    bool with_outcomes = false;
    eval->add_option("--out", report_path, "write the JSON report here");
    eval->add_flag("--outcomes", with_outcomes, "include per-case outcomes in the JSON report");
    eval->add_option("--threads", threads);
    res.add_options(eval);

    auto* serve = app.add_subcommand("serve", "run the HTTP consultation service");
    std::string host = "127.0.0.1", state_dir;
    int port = 8080;
    bool lenient = false, apply_now = false;
    if (const char* env = std::getenv("DOPI_PORT"); env && *env) port = std::atoi(env);
    serve->add_option("graph", graph_path, "graph file (default: $DOPI_GRAPH)");
    serve->add_option("--port", port, "listen port (default: $DOPI_PORT or 8080)");
    serve->add_option("--host", host);
    serve->add_option("--state-dir", state_dir, "persist sessions and graph versions here");
    serve->add_option("--config", config_path, "engine config overrides (JSON)");
    serve->add_flag("--lenient", lenient, "accept complaints with no recognized symptom");
    serve->add_flag("--no-defer", apply_now, "apply updates even while sessions are live");
    res.add_options(serve);

    auto* consult = app.add_subcommand("consult", "interactive consultation in the terminal");
    consult->add_option("graph", graph_path, "graph file (default: $DOPI_GRAPH)");
    consult->add_option("--config", config_path, "engine config overrides (JSON)");
    res.add_options(consult);

    auto* synth = app.add_subcommand("synth", "write the synthetic benchmark case files");
    SyntheticSpec spec;
    synth->add_option("out", out_path, "output directory")->required();
    synth->add_option("--seed", spec.seed);
    synth->add_option("--diseases", spec.diseases);
    synth->add_option("--symptoms", spec.symptoms);
    synth->add_option("--test-per-disease", spec.test_cases_per_disease);
    synth->add_option("--train-per-disease", spec.training_cases_per_disease);
    synth->add_option("--peripheral-rate", spec.peripheral_rate);

    auto* validate = app.add_subcommand("validate-corpus", "check a corpus against the transcript schema");
    validate->add_option("corpus", corpus_path, "corpus directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*build) {
            const auto cases = load_cases(cases_path);
            save_graph(build_graph(cases, {smoothing, links}), out_path);
            std::cout << "wrote " << out_path << " (" << cases.size() << " cases)\n";
        } else if (*gen) {
            const auto g = load_graph(graph_path);
            const auto cases = load_cases(cases_path);
            auto engine = engine_config(config_path);
            engine.seed = seed;
            PatientConfig patient;
            patient.disclosure_count = disclosure;
            patient.misjudgment_rate = misjudgment;
            patient.seed = seed;
            patient.validate();
            const RuleBasedGuidance doctor = res.guidance(g);
            const PatientVoice voice(doctor.table(), doctor.lexicon());
            const auto expert = res.expert();
            const auto corpus = generate_corpus(cases, g, engine, patient, {doctor, voice, expert}, corpus_id, threads);
            write_corpus(corpus, out_path);
            std::cout << "wrote " << corpus.transcripts.size() << " transcripts to " << out_path << "\n";
            if (low_info) {
                const auto split = make_low_information_split(corpus);
                for (const auto& w : split.warnings) std::cerr << "warning: " << w << "\n";
                write_corpus(split.corpus, fs::path(out_path) / "low_information");
                std::cout << "wrote " << split.corpus.transcripts.size() << " low-information transcripts\n";
            }
        } else if (*eval) {
            const auto g = load_graph(graph_path);
            const auto corpus = read_corpus(corpus_path);
            const auto specs = parse_policies(policies, eval_misjudgment);
            const auto expert = res.expert();
            const auto report = run_benchmark(corpus, specs, g, expert, {threads, eval_seed});
            if (!report_path.empty()) write_file_atomically(report_path, report_to_json(report, with_outcomes));
            std::cout << report_table(report);
        } else if (*serve) {
            const auto g = load_graph(graph_path_or_env(graph_path));
            ServiceOptions options;
            if (!state_dir.empty()) options.state_dir = state_dir;
            options.strict = !lenient;
            options.defer_updates = !apply_now;
            options.engine = engine_config(config_path);
            auto expert = std::make_shared<RuleBasedExpert>(res.expert());
            ConsultationService service(g, res.guidance(g), expert, options);
            for (const auto& w : service.recovery_warnings()) std::cerr << "warning: " << w << "\n";
            httplib::Server server;
            service.mount(server);
            std::cout << "listening on " << host << ":" << port << std::endl;
            if (!server.listen(host, port)) throw Error("LISTEN_FAILED", "cannot listen on " + host + ":" + std::to_string(port));
        } else if (*consult) {
            const auto g = load_graph(graph_path_or_env(graph_path));
            const auto guidance = res.guidance(g);
            return run_consult(std::cin, std::cout, g, guidance, res.expert(), engine_config(config_path));
        } else if (*synth) {
            const auto bench = make_synthetic_benchmark(spec);
            fs::create_directories(out_path);
            write_file_atomically(fs::path(out_path) / "train_cases.json", cases_to_json(bench.training));
            write_file_atomically(fs::path(out_path) / "test_cases.json", cases_to_json(bench.test));
            std::cout << "wrote " << bench.training.size() << " training and " << bench.test.size()
                      << " test cases to " << out_path << "\n";
        } else if (*validate) {
            const auto corpus = read_corpus(corpus_path);
            std::cout << "ok: " << corpus.transcripts.size() << " transcripts, graph version "
                      << corpus.manifest.graph_version << "\n";
        }
    } catch (const UsageError& e) {
        emit_error("USAGE", e.what());
        return 1;
    } catch (const Error& e) {
        emit_error(e.code(), e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("ERROR", e.what());
        return 2;
    }
    return 0;
}
