#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dopi/error.hpp"
#include "dopi/knowledge_graph.hpp"
#include "dopi/text.hpp"

namespace dopi {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object", 0, where);
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'", 0, where + "." + key);
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_string() || v.get_ref<const std::string&>().empty())
        throw ParseError(where + "." + key + ": expected a non-empty string", 0, where + "." + key);
    return v.get<std::string>();
}

double require_weight(const json& obj, const char* key, const std::string& where) {
    const auto& v = require(obj, key, where);
    if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number", 0, where + "." + key);
    const double w = v.get<double>();
    if (!(w >= 0.0 && w <= 1.0))
        throw ParseError(where + "." + key + ": weight outside [0, 1]", 0, where + "." + key);
    return w;
}

CaseRecord case_from(const json& obj, const std::string& where) {
    CaseRecord rec;
    rec.disease = DiseaseId(require_string(obj, "disease", where));
    const auto& list = require(obj, "symptoms", where);
    if (!list.is_array()) throw ParseError(where + ".symptoms: expected an array", 0, where + ".symptoms");
    for (std::size_t j = 0; j < list.size(); ++j) {
        const auto field = where + ".symptoms[" + std::to_string(j) + "]";
        if (!list[j].is_string() || list[j].get_ref<const std::string&>().empty())
            throw ParseError(field + ": expected a non-empty string", 0, field);
        if (!rec.symptoms.insert(SymptomId(list[j].get<std::string>())).second)
            throw ParseError(field + ": duplicate symptom '" + list[j].get<std::string>() + "'", 0, field);
    }
    if (rec.symptoms.empty())
        throw ParseError(where + ": empty symptom list", 0, where + ".symptoms");
    return rec;
}

} // namespace

std::string graph_to_json(const KnowledgeGraph& g) {
    json doc;
    doc["format_version"] = kGraphFormatVersion;
    doc["version"] = g.version();
    auto& symptoms = doc["symptoms"] = json::array();
    for (const auto& s : g.symptoms()) symptoms.push_back(s.str());
    auto& diseases = doc["diseases"] = json::array();
    for (const auto& d : g.diseases()) diseases.push_back(d.str());
    auto& sd = doc["sd_edges"] = json::array();
    for (std::size_t k = 0; k < g.symptom_count(); ++k)
        for (std::size_t i = 0; i < g.disease_count(); ++i)
            if (g.has_edge(k, i))
                sd.push_back({{"s", g.symptoms()[k].str()}, {"d", g.diseases()[i].str()}, {"w", g.weight(k, i)}});
    auto& ss = doc["ss_edges"] = json::array();
    for (const auto& [key, w] : g.symptom_links())
        ss.push_back({{"a", g.symptoms()[key.first].str()}, {"b", g.symptoms()[key.second].str()}, {"w", w}});
    return doc.dump(2) + "\n";
}

KnowledgeGraph graph_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto line = line_of_offset(text, e.byte);
        throw ParseError("graph file, line " + std::to_string(line) + ": " + e.what(), line);
    }
    const auto& fv = require(doc, "format_version", "graph");
    if (!fv.is_number_integer() || fv.get<int>() != kGraphFormatVersion)
        throw ParseError("graph.format_version: unsupported format version " + fv.dump(), 0,
                         "graph.format_version");
    const auto& ver = require(doc, "version", "graph");
    if (!ver.is_number_unsigned()) throw ParseError("graph.version: expected a non-negative integer", 0, "graph.version");

    std::vector<SymptomId> symptoms;
    const auto& sl = require(doc, "symptoms", "graph");
    if (!sl.is_array()) throw ParseError("graph.symptoms: expected an array", 0, "graph.symptoms");
    for (std::size_t k = 0; k < sl.size(); ++k) {
        if (!sl[k].is_string()) {
            const auto field = "graph.symptoms[" + std::to_string(k) + "]";
            throw ParseError(field + ": expected a string", 0, field);
        }
        symptoms.emplace_back(sl[k].get<std::string>());
    }
    std::vector<DiseaseId> diseases;
    const auto& dl = require(doc, "diseases", "graph");
    if (!dl.is_array()) throw ParseError("graph.diseases: expected an array", 0, "graph.diseases");
    for (std::size_t i = 0; i < dl.size(); ++i) {
        if (!dl[i].is_string()) {
            const auto field = "graph.diseases[" + std::to_string(i) + "]";
            throw ParseError(field + ": expected a string", 0, field);
        }
        diseases.emplace_back(dl[i].get<std::string>());
    }

    KnowledgeGraph g;
    try {
        g = KnowledgeGraph(std::move(symptoms), std::move(diseases), ver.get<std::uint64_t>());
    } catch (const DataError& e) {
        throw ParseError(std::string("graph: ") + e.what(), 0, "graph");
    }

    const auto& sd = require(doc, "sd_edges", "graph");
    if (!sd.is_array()) throw ParseError("graph.sd_edges: expected an array", 0, "graph.sd_edges");
    for (std::size_t e = 0; e < sd.size(); ++e) {
        const auto where = "graph.sd_edges[" + std::to_string(e) + "]";
        const auto s = g.symptom_index(SymptomId(require_string(sd[e], "s", where)));
        const auto d = g.disease_index(DiseaseId(require_string(sd[e], "d", where)));
        if (!s) throw ParseError(where + ".s: unknown symptom", 0, where + ".s");
        if (!d) throw ParseError(where + ".d: unknown disease", 0, where + ".d");
        if (g.has_edge(*s, *d)) throw ParseError(where + ": duplicate edge", 0, where);
        g.set_weight(*s, *d, require_weight(sd[e], "w", where));
    }
    const auto& ss = require(doc, "ss_edges", "graph");
    if (!ss.is_array()) throw ParseError("graph.ss_edges: expected an array", 0, "graph.ss_edges");
    for (std::size_t e = 0; e < ss.size(); ++e) {
        const auto where = "graph.ss_edges[" + std::to_string(e) + "]";
        const auto a = g.symptom_index(SymptomId(require_string(ss[e], "a", where)));
        const auto b = g.symptom_index(SymptomId(require_string(ss[e], "b", where)));
        if (!a) throw ParseError(where + ".a: unknown symptom", 0, where + ".a");
        if (!b) throw ParseError(where + ".b: unknown symptom", 0, where + ".b");
        if (*a == *b) throw ParseError(where + ": link joins a symptom to itself", 0, where);
        g.set_link_weight(*a, *b, require_weight(ss[e], "w", where));
    }
    return g;
}

void save_graph(const KnowledgeGraph& g, const std::filesystem::path& destination) {
    write_file_atomically(destination, graph_to_json(g));
}

KnowledgeGraph load_graph(const std::filesystem::path& source) {
    return graph_from_json(read_file(source));
}

std::vector<CaseRecord> cases_from_json(const std::string& text) {
    std::vector<CaseRecord> cases;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            const auto line = line_of_offset(text, e.byte);
            throw ParseError("cases, line " + std::to_string(line) + ": " + e.what(), line);
        }
        for (std::size_t c = 0; c < doc.size(); ++c) cases.push_back(case_from(doc[c], "cases[" + std::to_string(c) + "]"));
        return cases;
    }
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            cases.push_back(case_from(json::parse(line), "line " + std::to_string(line_no)));
        } catch (const json::parse_error& e) {
            throw ParseError("cases, line " + std::to_string(line_no) + ": " + e.what(), line_no);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no, e.field());
        }
    }
    return cases;
}

std::vector<CaseRecord> load_cases(const std::filesystem::path& source) {
    return cases_from_json(read_file(source));
}

std::string cases_to_json(std::span<const CaseRecord> cases) {
    json doc = json::array();
    for (const auto& c : cases) {
        json syms = json::array();
        for (const auto& s : c.symptoms) syms.push_back(s.str());
        doc.push_back({{"disease", c.disease.str()}, {"symptoms", std::move(syms)}});
    }
    return doc.dump(2) + "\n";
}

} // namespace dopi
