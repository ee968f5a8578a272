#include "dopi/service.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>

#include <httplib.h>

#include "dopi/codec.hpp"
#include "dopi/engine.hpp"
#include "dopi/error.hpp"
#include "dopi/text.hpp"

namespace dopi {

namespace {

HttpResponse error_response(int status, const std::string& code, const std::string& message) {
    return {status, json{{"error", {{"code", code}, {"message", message}}}}};
}

std::optional<json> parse_body(const std::string& body) {
    try {
        return json::parse(body);
    } catch (const json::parse_error&) {
        return std::nullopt;
    }
}

std::filesystem::path graph_file(const std::filesystem::path& dir, std::uint64_t version) {
    return dir / "graphs" / ("v" + std::to_string(version) + ".json");
}

} // namespace

ConsultationService::ConsultationService(KnowledgeGraph graph, RuleBasedGuidance guidance,
                                         std::shared_ptr<const ExpertModel> expert, ServiceOptions options)
    : guidance_(std::move(guidance)),
      expert_(std::move(expert)),
      options_(std::move(options)),
      store_(options_.state_dir),
      queue_(options_.state_dir ? std::optional(*options_.state_dir / "queue.json") : std::nullopt) {
    if (!expert_) expert_ = std::make_shared<RuleBasedExpert>();
    options_.engine.validate();

    if (options_.state_dir) {
        const auto dir = *options_.state_dir / "graphs";
        std::filesystem::create_directories(dir);
        for (const auto& f : std::filesystem::directory_iterator(dir)) {
            if (f.path().extension() != ".json") continue;
            auto g = std::make_shared<const KnowledgeGraph>(load_graph(f.path()));
            graphs_[g->version()] = g;
        }
    }
    if (!graphs_.contains(graph.version())) install_graph(std::move(graph));
    current_ = graphs_.rbegin()->second;

    const auto lookup = [this](std::uint64_t v) -> const KnowledgeGraph& {
        auto g = graph_version(v);
        if (!g) throw DataError("GRAPH_VERSION", "no stored graph with version " + std::to_string(v));
        return *g;
    };
    auto recovered = store_.recover(lookup, *expert_);
    for (const auto& dx : recovered.finalized) queue_.push(dx.update_proposal);
    warnings_ = std::move(recovered.warnings);
}

void ConsultationService::install_graph(KnowledgeGraph g) {
    if (options_.state_dir) save_graph(g, graph_file(*options_.state_dir, g.version()));
    auto ptr = std::make_shared<const KnowledgeGraph>(std::move(g));
    std::lock_guard lock(graph_mu_);
    graphs_[ptr->version()] = ptr;
    if (!current_ || ptr->version() > current_->version()) current_ = ptr;
}

std::shared_ptr<const KnowledgeGraph> ConsultationService::current_graph() const {
    std::lock_guard lock(graph_mu_);
    return current_;
}

std::shared_ptr<const KnowledgeGraph> ConsultationService::graph_version(std::uint64_t version) const {
    std::lock_guard lock(graph_mu_);
    auto it = graphs_.find(version);
    return it == graphs_.end() ? nullptr : it->second;
}

json ConsultationService::batch_view(const QuestionBatch& batch) const {
    json symptoms = json::array();
    for (const auto& s : batch.symptoms) symptoms.push_back({{"id", s.str()}, {"text", guidance_.table().display(s)}});
    return json{{"round", batch.round}, {"symptoms", std::move(symptoms)}, {"text", guidance_.render_question(batch)}};
}

json ConsultationService::ranking_view(const DiseaseRanking& ranking) const {
    json out = json::array();
    const auto n = std::min(options_.ranking_top_k, ranking.entries.size());
    for (std::size_t r = 0; r < n; ++r) out.push_back(ranking.entries[r]);
    return out;
}

json ConsultationService::step_view(const SessionStore::Entry& entry) const {
    const auto& s = entry.session;
    json view{{"session_id", s.id},
              {"state", to_string(s.state)},
              {"stop_reason", to_string(s.stop_reason)},
              {"round", s.round},
              {"graph_version", s.graph_version},
              {"ranking", ranking_view(s.ranking)}};
    if (s.outstanding) view["questions"] = batch_view(*s.outstanding);
    if (entry.diagnosis) view["diagnosis"] = *entry.diagnosis;
    return view;
}

void ConsultationService::advance(SessionStore::Entry& entry, const KnowledgeGraph& g) {
    auto& s = entry.session;
    if (s.state == SessionState::ReadyToAsk) store_.append(entry, events::question(next_questions(s, g)));
    if (s.state == SessionState::Finalized && !entry.diagnosis) {
        entry.diagnosis = finalize(s, *expert_);
        store_.append(entry, events::diagnosis(*entry.diagnosis));
        queue_.push(entry.diagnosis->update_proposal);
    }
}

HttpResponse ConsultationService::create_session(const std::string& body) {
    const auto req = parse_body(body);
    if (!req) return error_response(400, "BAD_REQUEST", "request body is not valid JSON");
    if (!req->is_object() || req->empty()) return error_response(400, "BAD_REQUEST", "request body is empty");
    if (!req->contains("text") && !req->contains("symptoms"))
        return error_response(400, "BAD_REQUEST", "body needs 'text' or 'symptoms'");

    auto config = options_.engine;
    try {
        if (req->contains("config")) apply_overrides(config, req->at("config"));
        config.validate();
    } catch (const json::exception& e) {
        return error_response(400, "BAD_CONFIG", e.what());
    } catch (const DataError& e) {
        return error_response(400, "BAD_CONFIG", e.what());
    }

    const auto g = current_graph();
    std::set<SymptomId> initial;
    if (req->contains("symptoms")) {
        const auto& list = req->at("symptoms");
        if (!list.is_array()) return error_response(400, "BAD_REQUEST", "'symptoms' must be an array of ids");
        for (const auto& v : list) {
            if (!v.is_string() || v.get_ref<const std::string&>().empty())
                return error_response(400, "BAD_REQUEST", "'symptoms' must be an array of ids");
            SymptomId s(v.get<std::string>());
            if (!g->contains(s)) return error_response(422, "UNKNOWN_SYMPTOM", "unknown symptom '" + s.str() + "'");
            initial.insert(s);
        }
    }
    if (req->contains("text")) {
        const auto& text = req->at("text");
        if (!text.is_string()) return error_response(400, "BAD_REQUEST", "'text' must be a string");
        for (const auto& s : guidance_.align(text.get<std::string>())) initial.insert(s);
    }
    const auto& strict = req->contains("strict") ? req->at("strict") : json(options_.strict);
    if (!strict.is_boolean()) return error_response(400, "BAD_REQUEST", "'strict' must be a boolean");
    if (initial.empty() && strict.get<bool>())
        return error_response(422, "NO_SYMPTOMS", "no known symptom was recognized in the request");

    auto entry = store_.create(start_session(*g, initial, config, random_session_id()));
    std::lock_guard lock(entry->mu);
    advance(*entry, *g);
    return {201, step_view(*entry)};
}

HttpResponse ConsultationService::post_answers(const std::string& session_id, const std::string& body) {
    auto entry = store_.find(session_id);
    if (!entry) return error_response(404, "NOT_FOUND", "no session '" + session_id + "'");
    const auto req = parse_body(body);
    if (!req) return error_response(400, "BAD_REQUEST", "request body is not valid JSON");
    if (!req->is_object() || (!req->contains("answers") && !req->contains("text")))
        return error_response(400, "BAD_REQUEST", "body needs 'answers' or 'text'");

    std::lock_guard lock(entry->mu);
    auto& s = entry->session;
    if (s.state != SessionState::AwaitingAnswers)
        return error_response(409, "INVALID_STATE", "session is " + std::string(to_string(s.state)));
    const auto g = graph_version(s.graph_version);

    AnswerSet answers;
    try {
        if (req->contains("answers")) {
            from_json(req->at("answers"), answers);
        } else {
            const auto& text = req->at("text");
            if (!text.is_string()) return error_response(400, "BAD_REQUEST", "'text' must be a string");
            answers = guidance_.parse_answer(text.get<std::string>(), *s.outstanding);
        }
    } catch (const json::exception& e) {
        return error_response(400, "BAD_ANSWER", e.what());
    } catch (const DataError& e) {
        return error_response(400, e.code(), e.what());
    }

    try {
        record_answers(s, *g, answers);
    } catch (const DataError& e) {
        return error_response(422, e.code(), e.what());
    }
    store_.append(*entry, events::answers(answers));
    advance(*entry, *g);
    return {200, step_view(*entry)};
}

HttpResponse ConsultationService::get_session(const std::string& session_id) const {
    auto entry = store_.find(session_id);
    if (!entry) return error_response(404, "NOT_FOUND", "no session '" + session_id + "'");
    std::lock_guard lock(entry->mu);
    auto view = step_view(*entry);
    view["recorder"] = entry->session.recorder;
    view["history"] = entry->session.history;
    view["initial"] = json::array();
    for (const auto& s : entry->session.initial) view["initial"].push_back(s.str());
    return {200, std::move(view)};
}

HttpResponse ConsultationService::apply_updates() {
    std::lock_guard serial(update_mu_);
    KnowledgeGraph g = *current_graph();
    const auto before = g.version();
    const auto outcome = apply_pending_updates(store_, queue_, g, options_.defer_updates, options_.update);
    if (g.version() != before) install_graph(std::move(g));
    json skipped = json::array();
    for (const auto& a : outcome.skipped) {
        audit_.push_back(a);
        skipped.push_back({{"session_id", a.session_id}, {"reason", a.reason}});
    }
    if (options_.state_dir && !outcome.skipped.empty()) {
        std::string lines;
        for (const auto& a : skipped) lines += a.dump() + "\n";
        const auto path = *options_.state_dir / "audit.jsonl";
        std::string existing = std::filesystem::exists(path) ? read_file(path) : std::string{};
        write_file_atomically(path, existing + lines);
    }
    return {200, json{{"deferred", outcome.deferred},
                      {"applied", outcome.applied},
                      {"skipped", std::move(skipped)},
                      {"graph_version", outcome.version},
                      {"pending", queue_.size()}}};
}

HttpResponse ConsultationService::health() const {
    return {200, json{{"status", "ok"},
                      {"graph_version", current_graph()->version()},
                      {"sessions", store_.size()},
                      {"pending_updates", queue_.size()}}};
}

void ConsultationService::mount(httplib::Server& server) {
    auto wrap = [](auto handler) {
        return [handler](const httplib::Request& req, httplib::Response& res) {
            HttpResponse r;
            try {
                r = handler(req);
            } catch (const std::exception& e) {
                r = error_response(500, "INTERNAL", e.what());
            }
            res.status = r.status;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(r.body.dump(), "application/json");
        };
    };
    server.Post("/sessions", wrap([this](const httplib::Request& req) { return create_session(req.body); }));
    server.Post(R"(/sessions/([^/]+)/answers)",
                wrap([this](const httplib::Request& req) { return post_answers(req.matches[1].str(), req.body); }));
    server.Get(R"(/sessions/([^/]+))",
               wrap([this](const httplib::Request& req) { return get_session(req.matches[1].str()); }));
    server.Post("/updates/apply", wrap([this](const httplib::Request&) { return apply_updates(); }));
    server.Get("/health", wrap([this](const httplib::Request&) { return health(); }));
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

int run_consult(std::istream& in, std::ostream& out, const KnowledgeGraph& g, const GuidanceModel& guidance,
                const ExpertModel& expert, const EngineConfig& config) {
    std::string line;
    out << "Describe how you feel:\n> " << std::flush;
    if (!std::getline(in, line)) return 1;
    const auto initial = guidance.align(line);
    if (initial.empty()) out << "I could not match any symptom yet, so I will ask.\n";

    auto session = start_session(g, initial, config, "consult");
    while (session.state != SessionState::Finalized) {
        const auto batch = next_questions(session, g);
        if (!batch) break;
        out << guidance.render_question(*batch) << "\n> " << std::flush;
        if (!std::getline(in, line)) {
            force_finalize(session);
            break;
        }
        record_answers(session, g, guidance.parse_answer(line, *batch));
    }
    const auto dx = finalize(session, expert);
    char conf[32];
    std::snprintf(conf, sizeof conf, "%.2f", dx.confidence);
    out << "\nDiagnosis: " << dx.disease.str() << " (similarity " << conf << ")\n" << dx.advice_text << "\n";
    return 0;
}

} // namespace dopi
