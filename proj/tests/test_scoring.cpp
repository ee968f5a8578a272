#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dopi/error.hpp"
#include "dopi/scoring.hpp"
#include "support.hpp"

using namespace dopi;
using dopi::testing::random_graph;

namespace {

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        dot += static_cast<long double>(a[k]) * b[k];
        na += static_cast<long double>(a[k]) * a[k];
        nb += static_cast<long double>(b[k]) * b[k];
    }
    if (na == 0 || nb == 0) return 0.0;
    return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

SymptomRecorder present(std::initializer_list<const char*> ids) {
    SymptomRecorder r;
    for (auto s : ids) r.present.insert(SymptomId(s));
    return r;
}

} // namespace

TEST(Cosine, HandComputedValue) {
    const std::vector<double> p{1, 1, 0};
    const std::vector<double> d{0.5, 0.5, 0.5};
    EXPECT_NEAR(cosine_similarity(p, d), 0.81650, 1e-5);
}

TEST(Cosine, OrthogonalAndZeroVectors) {
    EXPECT_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
    EXPECT_EQ(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{0.3, 1}), 0.0);
    EXPECT_EQ(cosine_similarity(std::vector<double>{1, 1}, std::vector<double>{0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0, 1}, std::vector<double>{0.7, 0, 0.7}), 1.0);
}

TEST(Cosine, DimensionMismatchThrows) {
    try {
        cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 0, 0});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_EQ(e.code(), "DIMENSION_MISMATCH");
    }
}

TEST(Cosine, MatchesOracleOnRandomVectors) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution bit(0.4);
    for (int t = 0; t < 2000; ++t) {
        const std::size_t n = 1 + rng() % 30;
        std::vector<double> p(n), d(n);
        for (std::size_t k = 0; k < n; ++k) {
            p[k] = bit(rng) ? 1.0 : 0.0;
            d[k] = bit(rng) ? u(rng) : 0.0;
        }
        const double s = cosine_similarity(p, d);
        EXPECT_NEAR(s, oracle_cosine(p, d), 1e-12);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
    }
}

TEST(Cosine, ScaleInvariant) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int t = 0; t < 500; ++t) {
        std::vector<double> p{1, 0, 1, 1}, d(4);
        for (auto& x : d) x = u(rng);
        const double c = u(rng);
        std::vector<double> scaled = d;
        for (auto& x : scaled) x *= c;
        EXPECT_NEAR(cosine_similarity(p, d), cosine_similarity(p, scaled), 1e-12);
    }
}

TEST(PatientVector, MarksOnlyPresentSymptoms) {
    KnowledgeGraph g({SymptomId("a"), SymptomId("b"), SymptomId("c")}, {DiseaseId("X")});
    auto r = present({"c"});
    r.absent.insert(SymptomId("a"));
    r.asked.insert(SymptomId("b"));
    EXPECT_EQ(patient_vector(r, g).values, (std::vector<double>{0, 0, 1}));
    EXPECT_THROW(patient_vector(present({"zz"}), g), DataError);
}

TEST(Ranking, SortedBySimilarityThenId) {
    KnowledgeGraph g({SymptomId("a"), SymptomId("b")}, {DiseaseId("X"), DiseaseId("Y"), DiseaseId("Z")});
    g.set_weight(0, 0, 1.0);
    g.set_weight(0, 1, 0.5);
    g.set_weight(0, 2, 0.5);
    g.set_weight(1, 2, 0.5);
    const auto r = rank_diseases(g, patient_vector(present({"a"}), g));
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_EQ(r.entries[0].disease, DiseaseId("X"));
    EXPECT_EQ(r.entries[1].disease, DiseaseId("Y"));
    EXPECT_DOUBLE_EQ(r.entries[0].similarity, r.entries[1].similarity);
    EXPECT_EQ(r.entries[2].disease, DiseaseId("Z"));
    EXPECT_NEAR(r.entries[2].similarity, std::sqrt(0.5), 1e-12);
}

TEST(SymptomScore, WeightedSumOverRanking) {
    KnowledgeGraph g({SymptomId("k"), SymptomId("j")}, {DiseaseId("A"), DiseaseId("B")});
    g.set_weight(1, 0, 0.5);
    g.set_weight(1, 1, 1.0);
    DiseaseRanking ranking{{{DiseaseId("A"), 0.8}, {DiseaseId("B"), 0.2}}};
    const auto scores = score_symptoms(g, ranking, present({"k"}));
    ASSERT_EQ(scores.size(), 1u);
    EXPECT_NEAR(scores.at(SymptomId("j")), 0.6, 1e-12);
    const auto top1 = score_symptoms(g, ranking, present({"k"}), 1);
    EXPECT_NEAR(top1.at(SymptomId("j")), 0.4, 1e-12);
    EXPECT_THROW(score_symptoms(g, ranking, {}, 0), DataError);
}

TEST(SymptomScore, ExcludesEveryKnownSymptom) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto g = random_graph(rng, 12, 5);
        SymptomRecorder r;
        for (const auto& s : g.symptoms()) {
            switch (rng() % 4) {
            case 0: r.present.insert(s); break;
            case 1: r.absent.insert(s); r.asked.insert(s); break;
            case 2: r.asked.insert(s); break;
            default: break;
            }
        }
        const auto ranking = rank_diseases(g, patient_vector(r, g));
        const auto scores = score_symptoms(g, ranking, r);
        for (const auto& s : g.symptoms()) EXPECT_EQ(scores.contains(s), !r.known(s));
    }
}

TEST(SymptomScore, MatchesDirectSumOnRandomGraphs) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 200; ++t) {
        const auto g = random_graph(rng, 10, 6);
        SymptomRecorder r;
        r.present.insert(g.symptoms()[rng() % g.symptom_count()]);
        const auto p = patient_vector(r, g).values;
        const auto scores = score_symptoms(g, rank_diseases(g, patient_vector(r, g)), r);
        for (std::size_t j = 0; j < g.symptom_count(); ++j) {
            if (r.known(g.symptoms()[j])) continue;
            double expected = 0.0;
            for (std::size_t i = 0; i < g.disease_count(); ++i) {
                std::vector<double> col(g.symptom_count());
                for (std::size_t k = 0; k < g.symptom_count(); ++k) col[k] = g.weight(k, i);
                expected += g.weight(j, i) * oracle_cosine(p, col);
            }
            EXPECT_NEAR(scores.at(g.symptoms()[j]), expected, 1e-9);
        }
    }
}

TEST(SymptomScore, RawWeightFallback) {
    KnowledgeGraph g({SymptomId("a"), SymptomId("b")}, {DiseaseId("X"), DiseaseId("Y")});
    g.set_weight(0, 0, 0.25);
    g.set_weight(0, 1, 0.5);
    g.set_weight(1, 1, 1.0);
    const auto s = raw_weight_scores(g, {});
    EXPECT_DOUBLE_EQ(s.at(SymptomId("a")), 0.75);
    EXPECT_DOUBLE_EQ(s.at(SymptomId("b")), 1.0);
}

TEST(Noise, InverseScheduleAndStatistics) {
    NoiseSchedule sched;
    EXPECT_DOUBLE_EQ(sched.sigma(1), 0.05);
    EXPECT_DOUBLE_EQ(sched.sigma(4), 0.0125);
    EXPECT_THROW(sched.sigma(0), DataError);

    sched.sigma0 = 0.2;
    SymptomScoreSet zeros;
    for (int k = 0; k < 100000; ++k) zeros.emplace(SymptomId("s" + std::to_string(k)), 0.0);
    Rng rng(77);
    const auto noisy = perturb_scores(zeros, 2, sched, rng);
    double sum = 0, sq = 0;
    for (const auto& [_, v] : noisy) {
        sum += v;
        sq += v * v;
    }
    const double mean = sum / noisy.size();
    const double sd = std::sqrt(sq / noisy.size() - mean * mean);
    EXPECT_NEAR(sd, 0.1, 0.005);
    EXPECT_NEAR(mean, 0.0, 0.002);
}

TEST(Noise, OtherDecays) {
    NoiseSchedule e{0.1, NoiseSchedule::Decay::Exponential, 0.5};
    EXPECT_DOUBLE_EQ(e.sigma(1), 0.1);
    EXPECT_NEAR(e.sigma(3), 0.1 * std::exp(-1.0), 1e-15);
    NoiseSchedule c{0.1, NoiseSchedule::Decay::Constant, 0};
    EXPECT_DOUBLE_EQ(c.sigma(9), 0.1);
}

TEST(Noise, ZeroSigmaIsIdentity) {
    SymptomScoreSet scores{{SymptomId("a"), 0.3}, {SymptomId("b"), 0.7}};
    NoiseSchedule none{0.0};
    Rng rng(1);
    const Rng before = rng;
    EXPECT_EQ(perturb_scores(scores, 1, none, rng), scores);
    EXPECT_EQ(rng, before);
}

TEST(Noise, SameSeedSameDraws) {
    SymptomScoreSet scores{{SymptomId("a"), 0.3}, {SymptomId("b"), 0.7}, {SymptomId("c"), 0.1}};
    Rng r1(5), r2(5);
    EXPECT_EQ(perturb_scores(scores, 1, {}, r1), perturb_scores(scores, 1, {}, r2));
}

TEST(SelectCandidates, TopKWithIdTieBreak) {
    SymptomScoreSet scores{{SymptomId("a"), 0.5}, {SymptomId("b"), 0.9}, {SymptomId("c"), 0.5}, {SymptomId("d"), 0.1}};
    EXPECT_EQ(select_candidates(scores, 3), (std::vector<SymptomId>{SymptomId("b"), SymptomId("a"), SymptomId("c")}));
    EXPECT_EQ(select_candidates(scores, 1), (std::vector<SymptomId>{SymptomId("b")}));
    EXPECT_EQ(select_candidates(scores, 10).size(), 4u);
    EXPECT_TRUE(select_candidates({}, 3).empty());
    EXPECT_THROW(select_candidates(scores, 0), DataError);
}

TEST(SelectCandidates, AllTiedGivesFirstIds) {
    SymptomScoreSet scores{{SymptomId("e"), 0.0}, {SymptomId("b"), 0.0}, {SymptomId("c"), 0.0}, {SymptomId("a"), 0.0}};
    EXPECT_EQ(select_candidates(scores, 3), (std::vector<SymptomId>{SymptomId("a"), SymptomId("b"), SymptomId("c")}));
}

TEST(SelectCandidates, InvariantUnderPositiveScaling) {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> level(0, 6);
    for (int t = 0; t < 300; ++t) {
        SymptomScoreSet s, scaled;
        const double c = 0.25 * (1 + rng() % 16);
        for (int k = 0; k < 12; ++k) {
            const double v = level(rng) / 4.0;
            s.emplace(SymptomId(dopi::testing::sym(k)), v);
            scaled.emplace(SymptomId(dopi::testing::sym(k)), v * c);
        }
        EXPECT_EQ(select_candidates(s, 3), select_candidates(scaled, 3));
    }
}

TEST(SelectCandidates, MatchesSortOracle) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> level(0, 4);
    for (int t = 0; t < 300; ++t) {
        SymptomScoreSet s;
        const int n = 1 + static_cast<int>(rng() % 10);
        for (int k = 0; k < n; ++k) s.emplace(SymptomId(dopi::testing::sym(k)), level(rng) * 0.1);
        std::vector<std::pair<double, std::string>> all;
        for (const auto& [id, v] : s) all.emplace_back(-v, id.str());
        std::sort(all.begin(), all.end());
        const std::size_t b = 1 + rng() % 4;
        std::vector<SymptomId> expected;
        for (std::size_t r = 0; r < std::min(b, all.size()); ++r) expected.emplace_back(all[r].second);
        EXPECT_EQ(select_candidates(s, b), expected);
    }
}
