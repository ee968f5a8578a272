#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopi/adapters.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/session_store.hpp"

namespace httplib {
class Server;
}

namespace dopi {

struct ServiceOptions {
    // Sessions and graph versions are persisted here when set.
    std::optional<std::filesystem::path> state_dir;
    // Reject complaints that name no known symptom.
    bool strict = true;
    // Postpone graph updates while sessions bound to the current version are live.
    bool defer_updates = true;
    std::size_t ranking_top_k = 5;
    EngineConfig engine;
    UpdateOptions update;
};

struct HttpResponse {
    int status = 200;
    nlohmann::json body;
};

// Session lifecycle over JSON. Handlers are plain functions of the request
// body so they can be exercised without a socket; mount() wires them to a server.
class ConsultationService {
public:
    ConsultationService(KnowledgeGraph graph, RuleBasedGuidance guidance, std::shared_ptr<const ExpertModel> expert,
                        ServiceOptions options = {});

    HttpResponse create_session(const std::string& body);
    HttpResponse post_answers(const std::string& session_id, const std::string& body);
    HttpResponse get_session(const std::string& session_id) const;
    HttpResponse apply_updates();
    HttpResponse health() const;

    void mount(httplib::Server& server);

    std::shared_ptr<const KnowledgeGraph> current_graph() const;
    std::shared_ptr<const KnowledgeGraph> graph_version(std::uint64_t version) const;
    std::size_t pending_updates() const { return queue_.size(); }
    const SessionStore& store() const noexcept { return store_; }
    const std::vector<AuditRecord>& audit() const noexcept { return audit_; }
    const std::vector<std::string>& recovery_warnings() const noexcept { return warnings_; }

private:
    nlohmann::json batch_view(const QuestionBatch& batch) const;
    nlohmann::json ranking_view(const DiseaseRanking& ranking) const;
    nlohmann::json step_view(const SessionStore::Entry& entry) const;
    // Asks the next batch or, when the session has stopped, diagnoses it.
    void advance(SessionStore::Entry& entry, const KnowledgeGraph& g);
    void install_graph(KnowledgeGraph g);

    RuleBasedGuidance guidance_;
    std::shared_ptr<const ExpertModel> expert_;
    ServiceOptions options_;

    mutable std::mutex graph_mu_;
    std::mutex update_mu_;
    std::map<std::uint64_t, std::shared_ptr<const KnowledgeGraph>> graphs_;
    std::shared_ptr<const KnowledgeGraph> current_;

    SessionStore store_;
    UpdateQueue queue_;
    std::vector<AuditRecord> audit_;
    std::vector<std::string> warnings_;
};

// Interactive terminal consultation. Returns a process exit status.
int run_consult(std::istream& in, std::ostream& out, const KnowledgeGraph& g, const GuidanceModel& guidance,
                const ExpertModel& expert, const EngineConfig& config);

} // namespace dopi
