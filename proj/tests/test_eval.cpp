#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "dopi/dialogue.hpp"
#include "dopi/error.hpp"
#include "dopi/eval.hpp"
#include "dopi/synthetic.hpp"
#include "support.hpp"

using namespace dopi;
using dopi::testing::data_dir;

namespace {

using Pair = std::pair<DiseaseId, DiseaseId>;

Pair pair(const char* predicted, const char* truth) { return {DiseaseId(predicted), DiseaseId(truth)}; }

struct Toy {
    std::vector<CaseRecord> cases = load_cases(data_dir() / "toy_cases.json");
    KnowledgeGraph graph = build_graph(cases);
    RuleBasedGuidance doctor = [this] {
        auto t = TermAliasTable::load(data_dir() / "aliases.json");
        t.bind(graph);
        return RuleBasedGuidance(std::move(t), CueLexicon::load(data_dir() / "cues_en.json"));
    }();
    PatientVoice voice{doctor.table(), doctor.lexicon()};
    RuleBasedExpert expert;

    Corpus corpus(std::uint64_t seed, double misjudgment = 0.0, std::size_t disclosure = 1) const {
        EngineConfig e;
        e.seed = seed;
        PatientConfig p;
        p.seed = seed * 3 + 1;
        p.misjudgment_rate = misjudgment;
        p.disclosure_count = disclosure;
        return generate_corpus(cases, graph, e, p, {doctor, voice, expert}, "toy", 4);
    }
};

const Toy& toy() {
    static const Toy t;
    return t;
}

std::vector<PolicySpec> all_policies() {
    std::vector<PolicySpec> out;
    for (auto id : {PolicyId::Dopi, PolicyId::GreedyNoNoise, PolicyId::RandomQuestion, PolicyId::NoQuestion}) {
        PolicySpec s;
        s.id = id;
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST(Metrics, AccuracyHandCases) {
    const std::vector<Pair> three_of_four{pair("a", "a"), pair("b", "b"), pair("c", "x"), pair("d", "d")};
    EXPECT_DOUBLE_EQ(diagnostic_accuracy(three_of_four), 0.75);
    const std::vector<Pair> all{pair("a", "a")};
    EXPECT_DOUBLE_EQ(diagnostic_accuracy(all), 1.0);
    const std::vector<Pair> none{pair("a", "b"), pair("b", "a")};
    EXPECT_DOUBLE_EQ(diagnostic_accuracy(none), 0.0);
    EXPECT_THROW(diagnostic_accuracy({}), DataError);
}

TEST(Metrics, QaRatioHandCases) {
    const std::vector<RoundCounts> s{{2, 1}, {0, 1}};
    EXPECT_DOUBLE_EQ(qa_ratio(s), 1.0);
    const std::vector<RoundCounts> one{{4, 1}};
    EXPECT_DOUBLE_EQ(qa_ratio(one), 4.0);
    const std::vector<RoundCounts> mixed{{3, 2}, {1, 1}};
    EXPECT_DOUBLE_EQ(qa_ratio(mixed), 1.25);
    const std::vector<RoundCounts> zero{{3, 1}, {1, 0}};
    try {
        qa_ratio(zero);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), "ZERO_ANSWERS");
    }
    EXPECT_THROW(qa_ratio({}), DataError);
}

TEST(Metrics, DistanceHandCases) {
    const std::vector<RoundCounts> m1{{2, 1}};
    const std::vector<RoundCounts> r1{{0, 1}};
    EXPECT_DOUBLE_EQ(interrogation_distance(m1, r1), 4.0);
    const std::vector<RoundCounts> m2{{2, 1}, {0, 1}};
    const std::vector<RoundCounts> r2{{0, 1}, {0, 1}};
    EXPECT_DOUBLE_EQ(interrogation_distance(m2, r2), 2.0);
    const std::vector<RoundCounts> m3{{1, 2}};
    const std::vector<RoundCounts> r3{{3, 1}};
    EXPECT_DOUBLE_EQ(interrogation_distance(m3, r3), 5.0);
    EXPECT_DOUBLE_EQ(interrogation_distance(m2, m2), 0.0);
    try {
        interrogation_distance(m1, r2);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), "LENGTH_MISMATCH");
    }
}

TEST(Metrics, PermutationInvariant) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 1 + rng() % 20;
        std::vector<Pair> pairs;
        std::vector<RoundCounts> model, ref;
        for (std::size_t i = 0; i < n; ++i) {
            pairs.push_back(pair(rng() % 2 ? "a" : "b", rng() % 2 ? "a" : "b"));
            model.push_back({rng() % 6, 1});
            ref.push_back({rng() % 6, 1 + rng() % 2});
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<Pair> p2;
        std::vector<RoundCounts> m2, r2;
        for (auto i : order) {
            p2.push_back(pairs[i]);
            m2.push_back(model[i]);
            r2.push_back(ref[i]);
        }
        EXPECT_DOUBLE_EQ(diagnostic_accuracy(pairs), diagnostic_accuracy(p2));
        EXPECT_NEAR(qa_ratio(model), qa_ratio(m2), 1e-12);
        EXPECT_NEAR(interrogation_distance(model, ref), interrogation_distance(m2, r2), 1e-12);
        EXPECT_GE(interrogation_distance(model, ref), 0.0);
    }
}

TEST(Benchmark, ReplayOfOwnCorpusHasZeroDistance) {
    const auto corpus = toy().corpus(7, 0.1);
    PolicySpec dopi;
    const auto report = run_benchmark(corpus, std::span(&dopi, 1), toy().graph, toy().expert);
    const auto& r = report.policy("dopi");
    EXPECT_DOUBLE_EQ(r.interrogation_distance, 0.0);
    EXPECT_EQ(r.n, corpus.transcripts.size());
    for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        EXPECT_EQ(r.outcomes[i].predicted, corpus.transcripts[i].final.disease);
        EXPECT_EQ(r.outcomes[i].model, r.outcomes[i].reference);
    }
}

TEST(Benchmark, AggregatesMatchOutcomes) {
    const auto corpus = toy().corpus(8, 0.15);
    const auto policies = all_policies();
    const auto report = run_benchmark(corpus, policies, toy().graph, toy().expert, {4, std::nullopt});
    ASSERT_EQ(report.policies.size(), 4u);
    for (const auto& p : report.policies) {
        std::size_t correct = 0;
        double qa = 0, dist = 0;
        std::size_t hist_total = 0;
        for (const auto& o : p.outcomes) {
            correct += o.predicted == o.truth;
            qa += static_cast<double>(o.model.questions) / static_cast<double>(o.model.answers);
            const double dq = double(o.model.questions) - double(o.reference.questions);
            const double da = double(o.model.answers) - double(o.reference.answers);
            dist += dq * dq + da * da;
        }
        for (const auto& [_, c] : p.rounds_hist) hist_total += c;
        const double n = static_cast<double>(p.outcomes.size());
        EXPECT_DOUBLE_EQ(p.accuracy, correct / n) << p.id;
        EXPECT_NEAR(p.qa_ratio, qa / n, 1e-12);
        EXPECT_NEAR(p.interrogation_distance, dist / n, 1e-12);
        EXPECT_EQ(hist_total, p.n);
        EXPECT_TRUE(std::is_sorted(p.outcomes.begin(), p.outcomes.end(),
                                   [](const auto& a, const auto& b) { return a.case_id < b.case_id; }));
    }
    const auto& silent = report.policy("no_question");
    EXPECT_DOUBLE_EQ(silent.qa_ratio, 0.0);
    EXPECT_EQ(silent.rounds_hist.size(), 1u);
    EXPECT_NE(report.policy("dopi").config_fingerprint, report.policy("greedy_no_noise").config_fingerprint);
}

TEST(Benchmark, SameSeedSameReport) {
    const auto corpus = toy().corpus(9, 0.2);
    const auto policies = all_policies();
    const auto a = run_benchmark(corpus, policies, toy().graph, toy().expert, {1, 42});
    const auto b = run_benchmark(corpus, policies, toy().graph, toy().expert, {8, 42});
    EXPECT_EQ(a, b);
    EXPECT_EQ(report_to_json(a, true), report_to_json(b, true));
    EXPECT_EQ(report_table(a), report_table(b));
}

TEST(Benchmark, GraphVersionMismatch) {
    const auto corpus = toy().corpus(1);
    auto g = toy().graph;
    g.set_version(5);
    PolicySpec dopi;
    try {
        run_benchmark(corpus, std::span(&dopi, 1), g, toy().expert);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), "GRAPH_VERSION");
        EXPECT_NE(std::string(e.what()).find("version 0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("version 5"), std::string::npos);
    }
}

TEST(Benchmark, RejectsEmptyInputs) {
    auto corpus = toy().corpus(1);
    const auto policies = all_policies();
    EXPECT_THROW(run_benchmark(corpus, {}, toy().graph, toy().expert), DataError);
    corpus.transcripts.clear();
    EXPECT_THROW(run_benchmark(corpus, policies, toy().graph, toy().expert), DataError);
}

TEST(Benchmark, OverridesAndLabels) {
    const auto corpus = toy().corpus(2);
    PolicySpec strict;
    strict.engine_overrides = {{"max_rounds", 1}};
    strict.label = "one_round";
    const auto report = run_benchmark(corpus, std::span(&strict, 1), toy().graph, toy().expert);
    const auto& r = report.policy("one_round");
    EXPECT_EQ(r.policy, "dopi");
    for (const auto& [rounds, _] : r.rounds_hist) EXPECT_LE(rounds, 1u);
    PolicySpec bad;
    bad.engine_overrides = {{"epsilon_stop", 3.0}};
    EXPECT_THROW(run_benchmark(corpus, std::span(&bad, 1), toy().graph, toy().expert), DataError);
    EXPECT_THROW(policy_from_string("oracle"), DataError);
}

TEST(Benchmark, ReportJsonShape) {
    const auto corpus = toy().corpus(3);
    const auto policies = all_policies();
    const auto report = run_benchmark(corpus, policies, toy().graph, toy().expert);
    const auto doc = nlohmann::json::parse(report_to_json(report, true));
    EXPECT_EQ(doc["corpus_id"], "toy");
    EXPECT_EQ(doc["seeds"]["engine"], 3);
    ASSERT_EQ(doc["policies"].size(), 4u);
    EXPECT_EQ(doc["policies"][0]["outcomes"].size(), corpus.transcripts.size());
    EXPECT_FALSE(nlohmann::json::parse(report_to_json(report))["policies"][0].contains("outcomes"));
}

TEST(Synthetic, SignaturesRespectTheRequestedShape) {
    SyntheticSpec spec;
    const auto bench = make_synthetic_benchmark(spec);
    ASSERT_EQ(bench.signatures.size(), spec.diseases);
    for (const auto& [_, sig] : bench.signatures) EXPECT_EQ(sig.size(), spec.signature_size);
    // Pairwise overlap, recomputed here.
    std::size_t worst = 0;
    for (auto a = bench.signatures.begin(); a != bench.signatures.end(); ++a)
        for (auto b = std::next(a); b != bench.signatures.end(); ++b) {
            std::vector<SymptomId> common;
            std::set_intersection(a->second.begin(), a->second.end(), b->second.begin(), b->second.end(),
                                  std::back_inserter(common));
            worst = std::max(worst, common.size());
        }
    EXPECT_LE(worst, spec.max_overlap);
    EXPECT_EQ(worst, max_signature_overlap(bench.signatures));
}

TEST(Synthetic, CasesComeFromSignatures) {
    SyntheticSpec spec;
    spec.diseases = 20;
    spec.symptoms = 120;
    const auto bench = make_synthetic_benchmark(spec);
    EXPECT_EQ(bench.training.size(), spec.diseases * spec.training_cases_per_disease);
    EXPECT_EQ(bench.test.size(), spec.diseases * spec.test_cases_per_disease);
    std::map<DiseaseId, std::set<SymptomId>> seen;
    for (const auto& c : bench.training) {
        const auto& sig = bench.signatures.at(c.disease);
        for (const auto& s : c.symptoms) EXPECT_TRUE(sig.contains(s));
        seen[c.disease].insert(c.symptoms.begin(), c.symptoms.end());
    }
    // Every signature symptom appears in some training case, so the graph has the full edge set.
    for (const auto& [d, sig] : bench.signatures) EXPECT_EQ(seen[d], sig);
    for (const auto& c : bench.test) EXPECT_EQ(c.symptoms, bench.signatures.at(c.disease));
}

TEST(Synthetic, DeterministicPerSeed) {
    SyntheticSpec spec;
    spec.diseases = 10;
    spec.symptoms = 60;
    const auto a = make_synthetic_benchmark(spec);
    const auto b = make_synthetic_benchmark(spec);
    EXPECT_EQ(a.signatures, b.signatures);
    EXPECT_EQ(a.training, b.training);
    spec.seed += 1;
    EXPECT_NE(make_synthetic_benchmark(spec).training, a.training);
}

TEST(Synthetic, RejectsImpossibleSpecs) {
    SyntheticSpec spec;
    spec.symptoms = 5;
    EXPECT_THROW(make_synthetic_benchmark(spec), DataError);
    spec = {};
    spec.shared_core = 9;
    EXPECT_THROW(spec.validate(), DataError);
    spec = {};
    spec.peripheral_rate = 1.5;
    EXPECT_THROW(spec.validate(), DataError);
}
