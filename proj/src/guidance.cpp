#include <algorithm>

#include <json.hpp>

#include "dopi/adapters.hpp"
#include "dopi/error.hpp"
#include "dopi/text.hpp"

namespace dopi {

using nlohmann::json;

namespace {

std::size_t token_count(const std::string& normalized) {
    if (normalized.empty()) return 0;
    return 1 + static_cast<std::size_t>(std::count(normalized.begin(), normalized.end(), ' '));
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

// Does the token sequence `cue` occur contiguously in `tokens`?
bool contains_phrase(const std::vector<std::string>& tokens, const std::vector<std::string>& cue) {
    if (cue.empty() || cue.size() > tokens.size()) return false;
    return std::search(tokens.begin(), tokens.end(), cue.begin(), cue.end()) != tokens.end();
}

bool any_cue(const std::vector<std::string>& tokens, const std::vector<std::vector<std::string>>& cues) {
    return std::any_of(cues.begin(), cues.end(), [&](const auto& c) { return contains_phrase(tokens, c); });
}

std::vector<std::vector<std::string>> tokenized(const std::vector<std::string>& phrases) {
    std::vector<std::vector<std::string>> out;
    for (const auto& p : phrases) {
        auto t = tokenize(p);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::string> string_list(const json& doc, const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    const auto& arr = doc.at(key);
    if (!arr.is_array()) throw ParseError(std::string("cue lexicon: '") + key + "' must be an array", 0, key);
    for (const auto& v : arr) {
        if (!v.is_string()) throw ParseError(std::string("cue lexicon: '") + key + "' entries must be strings", 0, key);
        out.push_back(v.get<std::string>());
    }
    return out;
}

json parse_document(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto line = line_of_offset(text, e.byte);
        throw ParseError(std::string(what) + ", line " + std::to_string(line) + ": " + e.what(), line);
    }
}

} // namespace

void TermAliasTable::add_alias(const std::string& phrase, const SymptomId& symptom) {
    const auto key = normalize_text(phrase);
    if (key.empty()) throw DataError("BAD_ALIAS", "alias for '" + symptom.str() + "' is empty after normalization");
    auto [it, inserted] = aliases_.emplace(key, symptom);
    if (!inserted && it->second != symptom) {
        if (explicit_.contains(key))
            throw DataError("ALIAS_CONFLICT", "alias '" + key + "' maps to both '" + it->second.str() + "' and '" +
                                                  symptom.str() + "'");
        it->second = symptom;
    }
    explicit_.insert(key);
    max_tokens_ = std::max(max_tokens_, token_count(key));
    bound_ = false;
}

void TermAliasTable::set_phrase(const SymptomId& symptom, const std::string& phrase) {
    if (normalize_text(phrase).empty()) throw DataError("BAD_ALIAS", "empty phrase for '" + symptom.str() + "'");
    phrases_[symptom] = phrase;
    add_alias(phrase, symptom);
}

void TermAliasTable::bind(const KnowledgeGraph& g) {
    std::vector<std::string> missing;
    for (const auto& [phrase, target] : aliases_)
        if (!g.contains(target)) missing.push_back(target.str());
    for (const auto& [target, _] : phrases_)
        if (!g.contains(target)) missing.push_back(target.str());
    if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        throw DataError("UNKNOWN_SYMPTOM", "alias table names symptoms missing from the graph: " + join(missing, ", "));
    }
    for (const auto& s : g.symptoms()) {
        const auto key = normalize_text(s.str());
        if (key.empty() || explicit_.contains(key)) continue;
        if (aliases_.emplace(key, s).second) max_tokens_ = std::max(max_tokens_, token_count(key));
    }
    bound_ = true;
}

std::optional<SymptomId> TermAliasTable::lookup(const std::string& phrase) const {
    auto it = aliases_.find(normalize_text(phrase));
    if (it == aliases_.end()) return std::nullopt;
    return it->second;
}

std::string TermAliasTable::display(const SymptomId& symptom) const {
    auto it = phrases_.find(symptom);
    return it == phrases_.end() ? symptom.str() : it->second;
}

std::vector<TermAliasTable::Match> TermAliasTable::scan(const std::vector<std::string>& tokens) const {
    std::vector<Match> out;
    std::size_t p = 0;
    while (p < tokens.size()) {
        bool hit = false;
        for (std::size_t len = std::min(max_tokens_, tokens.size() - p); len >= 1; --len) {
            std::string key = tokens[p];
            for (std::size_t t = 1; t < len; ++t) key += " " + tokens[p + t];
            if (auto it = aliases_.find(key); it != aliases_.end()) {
                out.push_back({p, p + len, it->second});
                p += len;
                hit = true;
                break;
            }
        }
        if (!hit) ++p;
    }
    return out;
}

TermAliasTable TermAliasTable::from_json(const std::string& text) {
    const auto doc = parse_document(text, "alias table");
    if (!doc.is_object()) throw ParseError("alias table: expected an object");
    TermAliasTable table;
    if (doc.contains("phrases")) {
        for (const auto& [id, phrase] : doc.at("phrases").items()) {
            if (!phrase.is_string()) throw ParseError("alias table: phrases." + id + " must be a string", 0, "phrases." + id);
            table.set_phrase(SymptomId(id), phrase.get<std::string>());
        }
    }
    if (doc.contains("aliases")) {
        for (const auto& [phrase, id] : doc.at("aliases").items()) {
            if (!id.is_string() || id.get_ref<const std::string&>().empty())
                throw ParseError("alias table: aliases['" + phrase + "'] must be a symptom id", 0, "aliases");
            table.add_alias(phrase, SymptomId(id.get<std::string>()));
        }
    }
    return table;
}

TermAliasTable TermAliasTable::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

CueLexicon CueLexicon::from_json(const std::string& text) {
    const auto doc = parse_document(text, "cue lexicon");
    if (!doc.is_object()) throw ParseError("cue lexicon: expected an object");
    CueLexicon lx;
    lx.affirm = string_list(doc, "affirm");
    lx.negate = string_list(doc, "negate");
    lx.unsure = string_list(doc, "unsure");
    lx.all = string_list(doc, "all");
    lx.clause_breaks = string_list(doc, "clause_breaks");
    if (lx.affirm.empty() || lx.negate.empty())
        throw ParseError("cue lexicon: 'affirm' and 'negate' must both be non-empty");
    if (doc.contains("templates")) {
        const auto& t = doc.at("templates");
        auto read = [&t](const char* key, std::string& into) {
            if (t.contains(key)) into = t.at(key).get<std::string>();
        };
        read("question", lx.question_template);
        read("list_separator", lx.list_separator);
        read("list_last_separator", lx.list_last_separator);
        read("complaint", lx.complaint_template);
        read("complaint_last_separator", lx.complaint_last_separator);
        read("complaint_empty", lx.complaint_empty);
        read("affirm", lx.affirm_template);
        read("negate", lx.negate_template);
        read("unsure", lx.unsure_template);
    }
    return lx;
}

CueLexicon CueLexicon::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

std::set<SymptomId> align_terms(const TermAliasTable& table, const std::string& text) {
    std::set<SymptomId> out;
    for (const auto& m : table.scan(tokenize(text))) out.insert(m.symptom);
    return out;
}

std::string render_list(const std::vector<std::string>& items, const CueLexicon& lexicon) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += (i + 1 == items.size()) ? lexicon.list_last_separator : lexicon.list_separator;
        out += items[i];
    }
    return out;
}

std::string render_question(const QuestionBatch& batch, const TermAliasTable& table, const CueLexicon& lexicon) {
    std::vector<std::string> items;
    for (const auto& s : batch.symptoms) items.push_back(table.display(s));
    return replace_all(lexicon.question_template, "{list}", render_list(items, lexicon));
}

AnswerSet parse_answer(const std::string& text, const QuestionBatch& batch, const TermAliasTable& table,
                       const CueLexicon& lexicon) {
    const auto affirm = tokenized(lexicon.affirm);
    const auto negate = tokenized(lexicon.negate);
    const auto unsure = tokenized(lexicon.unsure);
    const auto all = tokenized(lexicon.all);
    const std::set<std::string> breaks = [&] {
        std::set<std::string> b;
        for (const auto& w : lexicon.clause_breaks) b.insert(normalize_text(w));
        return b;
    }();
    const std::set<SymptomId> in_batch(batch.symptoms.begin(), batch.symptoms.end());

    std::vector<std::vector<std::string>> clauses;
    std::string chunk;
    auto flush_chunk = [&] {
        std::vector<std::string> clause;
        for (auto& tok : tokenize(chunk)) {
            if (breaks.contains(tok)) {
                if (!clause.empty()) clauses.push_back(std::move(clause));
                clause.clear();
            } else {
                clause.push_back(std::move(tok));
            }
        }
        if (!clause.empty()) clauses.push_back(std::move(clause));
        chunk.clear();
    };
    for (char c : text) {
        if (c == ',' || c == ';' || c == '.' || c == '!' || c == '?' || c == '\n')
            flush_chunk();
        else
            chunk.push_back(c);
    }
    flush_chunk();

    std::map<SymptomId, Answer> explicit_answers;
    std::optional<Answer> blanket;
    for (auto& clause : clauses) {
        std::vector<SymptomId> mentioned;
        for (const auto& m : table.scan(clause)) {
            if (in_batch.contains(m.symptom)) mentioned.push_back(m.symptom);
            // Symptom wording never doubles as a cue.
            for (auto t = m.begin; t < m.end; ++t) clause[t].clear();
        }

        std::optional<Answer> polarity;
        if (any_cue(clause, unsure)) polarity = Answer::Unsure;
        else if (any_cue(clause, negate)) polarity = Answer::Absent;
        else if (any_cue(clause, affirm)) polarity = Answer::Present;
        if (!polarity) continue;

        if (!mentioned.empty()) {
            for (const auto& s : mentioned) explicit_answers[s] = *polarity;
        } else if (any_cue(clause, all) || batch.symptoms.size() == 1) {
            blanket = polarity;
        }
    }

    AnswerSet out;
    for (const auto& s : batch.symptoms) {
        auto it = explicit_answers.find(s);
        out[s] = it != explicit_answers.end() ? it->second : blanket.value_or(Answer::Unsure);
    }
    return out;
}

std::string RemoteGuidance::render_question(const QuestionBatch& batch) const {
    const auto fallback = base_.render_question(batch);
    try {
        json payload{{"symptoms", json::array()}, {"draft", fallback}};
        for (const auto& s : batch.symptoms) payload["symptoms"].push_back(base_.table().display(s));
        auto text = remote_complete(config_,
                                    "You are a doctor's assistant. Rewrite the draft as one short, plain-language "
                                    "question asking the patient about every listed symptom. Reply with the question only.",
                                    payload.dump());
        // Only accept a rendering that still mentions every symptom of the batch.
        const auto seen = base_.align(text);
        for (const auto& s : batch.symptoms)
            if (!seen.contains(s)) return fallback;
        return text;
    } catch (const Error&) {
        return fallback;
    }
}

} // namespace dopi
