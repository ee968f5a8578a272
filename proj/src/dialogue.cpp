#include "dopi/dialogue.hpp"

#include <fstream>
#include <sstream>

#include "dopi/codec.hpp"
#include "dopi/engine.hpp"
#include "dopi/error.hpp"
#include "dopi/parallel.hpp"
#include "dopi/text.hpp"

namespace dopi {

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

Role role_from_string(const std::string& s) {
    if (s == "doctor") return Role::Doctor;
    if (s == "patient") return Role::Patient;
    throw DataError("BAD_TURN", "unknown role '" + s + "'");
}

TurnKind kind_from_string(const std::string& s) {
    for (auto k : {TurnKind::Complaint, TurnKind::Question, TurnKind::Answer, TurnKind::Diagnosis})
        if (s == to_string(k)) return k;
    throw DataError("BAD_TURN", "unknown turn kind '" + s + "'");
}

json turn_to_json(const Turn& t) {
    json j{{"role", to_string(t.role)}, {"kind", to_string(t.kind)}, {"text", t.text}};
    if (!t.symptoms.empty()) j["symptoms"] = t.symptoms;
    if (!t.answers.empty()) j["answers"] = t.answers;
    return j;
}

Turn turn_from_json(const json& j) {
    Turn t;
    t.role = role_from_string(j.at("role").get<std::string>());
    t.kind = kind_from_string(j.at("kind").get<std::string>());
    t.text = j.at("text").get<std::string>();
    if (j.contains("symptoms")) t.symptoms = j.at("symptoms").get<std::vector<SymptomId>>();
    if (j.contains("answers")) from_json(j.at("answers"), t.answers);
    return t;
}

json patient_config_to_json(const PatientConfig& p) {
    return json{{"disclosure_count", p.disclosure_count},
                {"disclosure_fraction", p.disclosure_fraction ? json(*p.disclosure_fraction) : json(nullptr)},
                {"mode", p.mode == DisclosureMode::TopWeight ? "top_weight" : "random_subset"},
                {"misjudgment_rate", p.misjudgment_rate},
                {"seed", p.seed}};
}

PatientConfig patient_config_from_json(const json& j) {
    PatientConfig p;
    p.disclosure_count = j.at("disclosure_count").get<std::size_t>();
    if (!j.at("disclosure_fraction").is_null()) p.disclosure_fraction = j.at("disclosure_fraction").get<double>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "top_weight") p.mode = DisclosureMode::TopWeight;
    else if (mode == "random_subset") p.mode = DisclosureMode::RandomSubset;
    else throw DataError("BAD_CONFIG", "unknown disclosure mode '" + mode + "'");
    p.misjudgment_rate = j.at("misjudgment_rate").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

} // namespace

const char* to_string(Role r) { return r == Role::Doctor ? "doctor" : "patient"; }

const char* to_string(TurnKind k) {
    switch (k) {
    case TurnKind::Complaint: return "complaint";
    case TurnKind::Question: return "question";
    case TurnKind::Answer: return "answer";
    case TurnKind::Diagnosis: return "diagnosis";
    }
    return "complaint";
}

ConsultationRun run_consultation(const KnowledgeGraph& g, SimulatedPatient& patient, const EngineConfig& config,
                                 const ExpertModel& expert, const std::string& session_id, bool ask,
                                 std::optional<std::set<SymptomId>> initial) {
    ConsultationRun run;
    run.initial = initial ? std::move(*initial) : patient.initial_complaint(g);
    run.session = start_session(g, run.initial, config, session_id);
    if (!ask) force_finalize(run.session);
    while (run.session.state != SessionState::Finalized) {
        const auto batch = next_questions(run.session, g);
        if (!batch) break;
        record_answers(run.session, g, patient.answer_batch(*batch));
    }
    run.diagnosis = finalize(run.session, expert);
    return run;
}

std::string PatientVoice::complaint(const std::set<SymptomId>& disclosed) const {
    if (disclosed.empty()) return lexicon_.complaint_empty;
    std::vector<std::string> items;
    for (const auto& s : disclosed) items.push_back(table_.display(s));
    auto lx = lexicon_;
    lx.list_last_separator = lexicon_.complaint_last_separator;
    return replace_all(lexicon_.complaint_template, "{list}", render_list(items, lx));
}

std::string PatientVoice::reply(const QuestionBatch& batch, const AnswerSet& answers) const {
    std::vector<std::string> parts;
    for (const auto& s : batch.symptoms) {
        auto it = answers.find(s);
        const auto a = it == answers.end() ? Answer::Unsure : it->second;
        const auto& tmpl = a == Answer::Present  ? lexicon_.affirm_template
                           : a == Answer::Absent ? lexicon_.negate_template
                                                 : lexicon_.unsure_template;
        parts.push_back(replace_all(tmpl, "{symptom}", table_.display(s)));
    }
    return join(parts, " ");
}

DialogueTranscript generate_dialogue(const CaseRecord& truth, const KnowledgeGraph& g, const EngineConfig& engine,
                                     const PatientConfig& patient_config, const DialogueRenderers& renderers,
                                     const std::string& id) {
    if (!g.contains(truth.disease))
        throw DataError("UNKNOWN_DISEASE", "case disease '" + truth.disease.str() + "' is not in the graph");

    SimulatedPatient patient(truth, patient_config);
    const auto run = run_consultation(g, patient, engine, renderers.expert, id);

    DialogueTranscript t;
    t.id = id;
    t.graph_version = g.version();
    t.truth = truth;
    t.initial_disclosure = run.initial;
    t.final = run.diagnosis;
    t.stop_reason = run.session.stop_reason;
    t.engine_seed = engine.seed;
    t.patient_seed = patient_config.seed;

    t.turns.push_back({Role::Patient, TurnKind::Complaint, renderers.patient.complaint(run.initial),
                       {run.initial.begin(), run.initial.end()}, {}});
    for (const auto& ex : run.session.history) {
        t.turns.push_back({Role::Doctor, TurnKind::Question, renderers.doctor.render_question(ex.batch),
                           ex.batch.symptoms, {}});
        t.turns.push_back({Role::Patient, TurnKind::Answer, renderers.patient.reply(ex.batch, ex.answers), {}, ex.answers});
    }
    t.turns.push_back({Role::Doctor, TurnKind::Diagnosis, run.diagnosis.advice_text, {}, {}});

    for (const auto& turn : t.turns) {
        if (turn.role != Role::Doctor) continue;
        if (turn.kind == TurnKind::Question) ++t.doctor_question_rounds;
        else ++t.doctor_answer_rounds;
    }
    return t;
}

std::uint64_t derive_seed(std::uint64_t base, std::size_t index) {
    // splitmix64 finalizer
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Corpus generate_corpus(std::span<const CaseRecord> cases, const KnowledgeGraph& g, const EngineConfig& engine,
                       const PatientConfig& patient, const DialogueRenderers& renderers, std::string corpus_id,
                       unsigned threads) {
    Corpus corpus;
    corpus.manifest = {std::move(corpus_id), g.version(), engine, patient, renderers.doctor.id(), {"full"}};
    corpus.transcripts.resize(cases.size());
    parallel_for(cases.size(), threads, [&](std::size_t i) {
        auto e = engine;
        auto p = patient;
        e.seed = derive_seed(engine.seed, i);
        p.seed = derive_seed(patient.seed, i);
        char id[32];
        std::snprintf(id, sizeof id, "case-%05zu", i);
        corpus.transcripts[i] = generate_dialogue(cases[i], g, e, p, renderers, id);
    });
    return corpus;
}

void validate_transcript(const DialogueTranscript& t, std::uint64_t graph_version) {
    auto fail = [&](const std::string& what) { throw DataError("SCHEMA", "transcript " + t.id + ": " + what); };
    if (t.graph_version != graph_version)
        fail("graph version " + std::to_string(t.graph_version) + " differs from manifest version " +
             std::to_string(graph_version));
    if (t.truth.symptoms.empty()) fail("case has no symptoms");
    if (t.turns.empty() || t.turns.front().role != Role::Patient) fail("first turn must come from the patient");
    std::size_t questions = 0;
    std::size_t doctor_other = 0;
    std::size_t diagnoses = 0;
    for (const auto& turn : t.turns) {
        if (turn.kind == TurnKind::Diagnosis) ++diagnoses;
        if (turn.role == Role::Doctor) {
            if (turn.kind == TurnKind::Question) ++questions;
            else ++doctor_other;
        }
    }
    if (diagnoses != 1) fail("expected exactly one diagnosis turn, found " + std::to_string(diagnoses));
    if (t.turns.back().kind != TurnKind::Diagnosis) fail("last turn must be the diagnosis");
    if (questions != t.doctor_question_rounds) fail("doctor_question_rounds does not match the question turns");
    if (doctor_other != t.doctor_answer_rounds || t.doctor_answer_rounds < 1)
        fail("doctor_answer_rounds does not match the doctor's non-question turns");
    for (const auto& s : t.initial_disclosure)
        if (!t.truth.symptoms.contains(s)) fail("initial disclosure names symptom '" + s.str() + "' outside the case");
}

std::string transcript_to_json_line(const DialogueTranscript& t) {
    json turns = json::array();
    for (const auto& turn : t.turns) turns.push_back(turn_to_json(turn));
    json j{{"id", t.id},
           {"graph_version", t.graph_version},
           {"case", t.truth},
           {"initial_disclosure", t.initial_disclosure},
           {"turns", std::move(turns)},
           {"final", t.final},
           {"stop_reason", to_string(t.stop_reason)},
           {"doctor_question_rounds", t.doctor_question_rounds},
           {"doctor_answer_rounds", t.doctor_answer_rounds},
           {"engine_seed", t.engine_seed},
           {"patient_seed", t.patient_seed}};
    return j.dump();
}

DialogueTranscript transcript_from_json_line(const std::string& line, std::size_t line_no) {
    const auto where = "transcripts line " + std::to_string(line_no);
    try {
        const auto j = json::parse(line);
        DialogueTranscript t;
        t.id = j.at("id").get<std::string>();
        t.graph_version = j.at("graph_version").get<std::uint64_t>();
        t.truth = j.at("case").get<CaseRecord>();
        for (const auto& s : j.at("initial_disclosure")) t.initial_disclosure.insert(s.get<SymptomId>());
        for (const auto& turn : j.at("turns")) t.turns.push_back(turn_from_json(turn));
        t.final = j.at("final").get<Diagnosis>();
        t.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
        t.doctor_question_rounds = j.at("doctor_question_rounds").get<std::size_t>();
        t.doctor_answer_rounds = j.at("doctor_answer_rounds").get<std::size_t>();
        t.engine_seed = j.at("engine_seed").get<std::uint64_t>();
        t.patient_seed = j.at("patient_seed").get<std::uint64_t>();
        return t;
    } catch (const json::exception& e) {
        throw ParseError(where + ": schema violation: " + e.what(), line_no);
    } catch (const DataError& e) {
        throw ParseError(where + ": " + e.what(), line_no);
    }
}

std::string manifest_to_json(const CorpusManifest& m) {
    json j{{"corpus_id", m.corpus_id},
           {"graph_version", m.graph_version},
           {"engine", m.engine},
           {"patient", patient_config_to_json(m.patient)},
           {"renderer", m.renderer},
           {"splits", m.splits}};
    return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(const std::string& text) {
    try {
        const auto j = json::parse(text);
        CorpusManifest m;
        m.corpus_id = j.at("corpus_id").get<std::string>();
        m.graph_version = j.at("graph_version").get<std::uint64_t>();
        from_json(j.at("engine"), m.engine);
        m.patient = patient_config_from_json(j.at("patient"));
        m.renderer = j.at("renderer").get<std::string>();
        m.splits = j.at("splits").get<std::vector<std::string>>();
        return m;
    } catch (const json::parse_error& e) {
        const auto line = line_of_offset(text, e.byte);
        throw ParseError("manifest, line " + std::to_string(line) + ": " + e.what(), line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: schema violation: ") + e.what());
    }
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("IO_ERROR", "cannot create '" + dir.string() + "': " + ec.message());
    std::string lines;
    for (const auto& t : corpus.transcripts) lines += transcript_to_json_line(t) + "\n";
    write_file_atomically(dir / "transcripts.jsonl", lines);
    write_file_atomically(dir / "manifest.json", manifest_to_json(corpus.manifest));
}

Corpus read_corpus(const std::filesystem::path& dir) {
    Corpus corpus;
    corpus.manifest = manifest_from_json(read_file(dir / "manifest.json"));
    std::istringstream in(read_file(dir / "transcripts.jsonl"));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto t = transcript_from_json_line(line, line_no);
        try {
            validate_transcript(t, corpus.manifest.graph_version);
        } catch (const DataError& e) {
            throw ParseError("transcripts line " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
        corpus.transcripts.push_back(std::move(t));
    }
    return corpus;
}

SplitResult make_low_information_split(const Corpus& corpus) {
    SplitResult out;
    out.corpus.manifest = corpus.manifest;
    out.corpus.manifest.splits = {"low_information"};
    for (const auto& t : corpus.transcripts)
        if (t.initial_disclosure.size() <= 1) out.corpus.transcripts.push_back(t);
    if (out.corpus.transcripts.empty())
        out.warnings.push_back("low_information split of corpus '" + corpus.manifest.corpus_id +
                               "' is empty: every transcript discloses more than one symptom");
    return out;
}

} // namespace dopi
