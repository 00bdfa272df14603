#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "engram/errors.hpp"
#include "engram/eval.hpp"
#include "engram/text.hpp"

namespace py = pybind11;
using namespace engram;

namespace {

// Python-side convenience: route + extract with the built-in heuristics.
std::vector<TypedRecord> extract_turn(const DialogueTurn& turn) {
    return extract(turn, route_heuristic(turn), ExtractorPolicy{});
}

EvidenceBundle retrieve_py(const MemoryStore& store, const std::string& conversation_id,
                           const std::string& question, MockEncoder& encoder, int k,
                           bool split_by_speaker) {
    Query query = make_query(question, conversation_id, encoder);
    RetrievalConfig config;
    config.budget = k;
    config.split_by_speaker = split_by_speaker;
    return retrieve(store, query, config);
}

FactCardSet render_cards_py(const EvidenceBundle& bundle, const std::string& question) {
    ClaimPolicy policy;
    policy.question = question;
    return render_set(bundle, policy);
}

py::dict ingest_file(MemoryStore& store, const std::string& dataset_path, MockEncoder& encoder) {
    Dataset dataset = load_dataset(dataset_path);
    IngestPolicies policies;
    policies.encoder = &encoder;
    IngestSummary summary = ingest(dataset, store, policies);
    py::dict out;
    out["episodic"] = summary.episodic;
    out["semantic"] = summary.semantic;
    out["procedural"] = summary.procedural;
    out["skipped_existing"] = summary.skipped_existing;
    out["turns_processed"] = summary.turns_processed;
    return out;
}

}  // namespace

PYBIND11_MODULE(_engram, m) {
    m.doc() = "typed conversational memory with cited retrieval";

    py::register_exception<Error>(m, "EngramError");

    py::enum_<MemoryType>(m, "MemoryType")
        .value("episodic", MemoryType::episodic)
        .value("semantic", MemoryType::semantic)
        .value("procedural", MemoryType::procedural);

    py::class_<DialogueTurn>(m, "DialogueTurn")
        .def(py::init<>())
        .def_readwrite("conversation_id", &DialogueTurn::conversation_id)
        .def_readwrite("turn_index", &DialogueTurn::turn_index)
        .def_readwrite("speaker", &DialogueTurn::speaker)
        .def_readwrite("text", &DialogueTurn::text)
        .def_readwrite("timestamp", &DialogueTurn::timestamp);

    py::class_<RouteDecision>(m, "RouteDecision")
        .def_readonly("episodic", &RouteDecision::episodic)
        .def_readonly("semantic", &RouteDecision::semantic)
        .def_readonly("procedural", &RouteDecision::procedural)
        .def("any", &RouteDecision::any)
        .def("popcount", &RouteDecision::popcount);

    py::class_<TypedRecord>(m, "TypedRecord")
        .def(py::init<>())
        .def_readwrite("record_id", &TypedRecord::record_id)
        .def_readwrite("conversation_id", &TypedRecord::conversation_id)
        .def_readwrite("speaker", &TypedRecord::speaker)
        .def_readwrite("memory_type", &TypedRecord::memory_type)
        .def_readwrite("title", &TypedRecord::title)
        .def_readwrite("body", &TypedRecord::body)
        .def_readwrite("anchor", &TypedRecord::anchor)
        .def_readwrite("source_turn", &TypedRecord::source_turn)
        .def_readwrite("embedding", &TypedRecord::embedding)
        .def("__repr__", [](const TypedRecord& r) {
            return "<TypedRecord #" + std::to_string(r.record_id) + " " +
                   to_string(r.memory_type) + " " + r.speaker + ": " + r.body + ">";
        });

    py::class_<MockEncoder>(m, "MockEncoder")
        .def(py::init<int, std::uint64_t>(), py::arg("dim") = 32, py::arg("seed") = 42)
        .def("dim", &MockEncoder::dim)
        .def("embed", &MockEncoder::embed);

    py::class_<MemoryStore>(m, "MemoryStore")
        .def(py::init<const std::string&, int>(), py::arg("db_path"), py::arg("encoder_dim") = 0)
        .def("put", &MemoryStore::put)
        .def("get", &MemoryStore::get)
        .def("get_all", &MemoryStore::get_all)
        .def("count", &MemoryStore::count)
        .def("speakers", &MemoryStore::speakers)
        .def("conversation_ids", &MemoryStore::conversation_ids)
        .def("encoder_dim", &MemoryStore::encoder_dim);

    py::class_<ScoredCandidate>(m, "ScoredCandidate")
        .def_readonly("record", &ScoredCandidate::record)
        .def_readonly("score", &ScoredCandidate::score);

    py::class_<EvidenceBundle>(m, "EvidenceBundle")
        .def_readonly("per_speaker", &EvidenceBundle::per_speaker)
        .def("total", &EvidenceBundle::total)
        .def("flatten", &EvidenceBundle::flatten);

    py::class_<FactCard>(m, "FactCard")
        .def_readonly("card_id", &FactCard::card_id)
        .def_readonly("claim", &FactCard::claim)
        .def_readonly("anchor", &FactCard::anchor)
        .def_readonly("record_ref", &FactCard::record_ref);

    py::class_<FactCardSet>(m, "FactCardSet")
        .def_readonly("cards", &FactCardSet::cards)
        .def("has", &FactCardSet::has)
        .def("ids", &FactCardSet::ids)
        .def("render_lines", &FactCardSet::render_lines);

    py::class_<CitationReport>(m, "CitationReport")
        .def_readonly("cited", &CitationReport::cited)
        .def_readonly("invalid", &CitationReport::invalid)
        .def_readonly("uncited_answer", &CitationReport::uncited_answer)
        .def_readonly("valid", &CitationReport::valid);

    py::class_<Prompt>(m, "Prompt")
        .def_readonly("system_text", &Prompt::system_text)
        .def_readonly("user_text", &Prompt::user_text)
        .def_readonly("token_estimate", &Prompt::token_estimate);

    m.def("route", &route_heuristic, py::arg("turn"));
    m.def("extract", &extract_turn, py::arg("turn"));
    m.def("ingest_file", &ingest_file, py::arg("store"), py::arg("dataset_path"),
          py::arg("encoder"));
    m.def("retrieve", &retrieve_py, py::arg("store"), py::arg("conversation_id"),
          py::arg("question"), py::arg("encoder"), py::arg("k") = 25,
          py::arg("split_by_speaker") = true);
    m.def("render_cards", &render_cards_py, py::arg("bundle"), py::arg("question") = "");
    m.def("check_answer", &check_answer, py::arg("answer"), py::arg("cards"));
    m.def("build_prompt",
          [](const std::string& question, const FactCardSet& cards,
             const EvidenceBundle& bundle) {
              return build_engram_r_prompt(question, cards, bundle, TemplateSet::builtin());
          },
          py::arg("question"), py::arg("cards"), py::arg("bundle"));
    m.def("estimate_tokens",
          [](const std::string& s) { return text::estimate_tokens(s); });
}
