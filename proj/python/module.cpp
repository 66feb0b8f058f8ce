// Copyright 2026 The mrag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mrag/cli.hpp"
#include "mrag/corpus.hpp"
#include "mrag/error.hpp"
#include "mrag/evaluation.hpp"
#include "mrag/index.hpp"
#include "mrag/langid.hpp"
#include "mrag/mocks.hpp"
#include "mrag/pipeline.hpp"
#include "mrag/prompting.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace mrag;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

py::dict passage_dict(const corpus::Passage& p) {
  return py::dict("passage_id"_a = p.passage_id, "doc_id"_a = p.doc_id, "title"_a = p.title, "text"_a = p.text,
                  "lang"_a = std::string(to_string(p.lang)), "position"_a = p.position);
}

std::vector<std::pair<std::string, double>> ranked(const index::CandidateSet& set) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& c : set.ranked) out.emplace_back(c.passage_id, c.score);
  return out;
}

index::DenseIndex index_from_array(std::vector<std::string> ids, const FloatArray& vectors,
                                   const std::string& embed_service, const std::string& collection_id) {
  if (vectors.ndim() != 2) throw PreconditionError("vectors must be a 2-d array");
  if (static_cast<std::size_t>(vectors.shape(0)) != ids.size()) throw PreconditionError("one id per row required");
  index::IndexManifest m;
  m.collection_id = collection_id;
  m.dims = static_cast<std::size_t>(vectors.shape(1));
  m.embed_service = embed_service;
  std::vector<float> flat(vectors.data(), vectors.data() + vectors.size());
  return index::DenseIndex(m, std::move(ids), std::move(flat));
}

}  // namespace

PYBIND11_MODULE(_mrag, m) {
  m.doc() = "Multilingual RAG evaluation harness core";

  py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", m.attr("Error"));
  py::register_exception<PreconditionError>(m, "PreconditionError", m.attr("Error"));

  m.def("default_data_dir", [] { return pipeline::default_data_dir(); });
  m.def("languages", [] {
    std::vector<std::string> out;
    for (Lang l : kAllLanguages) out.emplace_back(to_string(l));
    return out;
  });

  m.def("normalize", [](const std::string& text, const std::string& lang) {
    return evaluation::normalize(text, parse_language(lang));
  }, "text"_a, "lang"_a = "en");
  m.def("char_ngrams", [](const std::string& token, std::size_t n) { return evaluation::char_ngrams(token, n); },
        "token"_a, "n"_a = 3);
  m.def("char3_recall", [](const std::vector<std::string>& gold, const std::string& response, const std::string& lang) {
    return evaluation::char3_recall(gold, response, parse_language(lang));
  }, "gold_answers"_a, "response"_a, "lang"_a = "en");
  m.def("token_recall", [](const std::vector<std::string>& gold, const std::string& response, const std::string& lang) {
    return evaluation::token_recall(gold, response, parse_language(lang));
  }, "gold_answers"_a, "response"_a, "lang"_a = "en");
  m.def("clr_eligible", &evaluation::clr_eligible, "response"_a);

  m.def("chunk_document", [](const std::string& doc_id, const std::string& title, const std::string& body,
                             const std::string& lang) {
    py::list out;
    for (const auto& p : corpus::chunk_document({doc_id, title, body, parse_language(lang)})) out.append(passage_dict(p));
    return out;
  }, "doc_id"_a, "title"_a, "body"_a, "lang"_a);

  m.def("identify", [](const std::string& text, const std::filesystem::path& data_dir) {
    auto id = langid::BuiltinIdentifier::from_directory(data_dir / "langid");
    auto v = id.identify(text);
    return v.lang ? py::object(py::str(std::string(to_string(*v.lang)))) : py::object(py::none());
  }, "text"_a, "data_dir"_a);

  m.def("render_system_prompt", [](const std::string& label, const std::string& ul, const std::filesystem::path& data_dir) {
    auto catalog = prompting::PromptCatalog::from_directory(data_dir / "prompts");
    auto names = prompting::LanguageNameCatalog::from_file(data_dir / "language_names.json");
    return prompting::render_system_prompt(catalog.spec(prompting::parse_label(label)), parse_language(ul), names);
  }, "label"_a, "ul"_a, "data_dir"_a);

  m.def("mock_embed", [](const std::string& text, std::size_t dims, std::uint64_t seed) {
    return mocks::MockEmbedder(seed, dims).embed_one(text).values;
  }, "text"_a, "dims"_a = 64, "seed"_a = 0);

  py::class_<index::DenseIndex>(m, "DenseIndex")
      .def(py::init(&index_from_array), "ids"_a, "vectors"_a, "embed_service"_a = "external",
           "collection_id"_a = "c")
      .def_static("open", &index::DenseIndex::open, "path"_a)
      .def_static("merge", [](const std::vector<index::DenseIndex>& parts) { return index::merge_indexes(parts); })
      .def("save", &index::DenseIndex::save, "path"_a)
      .def("__len__", &index::DenseIndex::size)
      .def_property_readonly("dims", &index::DenseIndex::dims)
      .def_property_readonly("embed_service", [](const index::DenseIndex& i) { return i.manifest().embed_service; })
      .def("search", [](const index::DenseIndex& idx, const FloatArray& query, std::size_t k, unsigned threads) {
        if (query.ndim() != 1) throw PreconditionError("query must be a 1-d array");
        py::gil_scoped_release release;
        return ranked(idx.search(std::span<const float>(query.data(), query.size()), k, threads));
      }, "query"_a, "k"_a, "threads"_a = 1);

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int status = cli::run_cli(args, out, err);
    return py::make_tuple(status, out.str(), err.str());
  }, "args"_a, "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
