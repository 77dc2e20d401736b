// Copyright 2026 The clipcurate Authors.
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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "clipcurate/clip_record.h"
#include "clipcurate/curation.h"
#include "clipcurate/manifest.h"
#include "clipcurate/noise_lab.h"
#include "clipcurate/ontology.h"
#include "clipcurate/retrieval.h"
#include "clipcurate/text_pipeline.h"
#include "clipcurate/util.h"
#include "clipcurate/wav.h"

namespace py = pybind11;

namespace clipcurate {
namespace {

ClipRecord RecordFromDict(const py::dict& d) {
  ClipRecord r;
  r.clip_id = py::str(d["id"]);
  if (d.contains("tags")) r.tags = d["tags"].cast<std::vector<std::string>>();
  if (d.contains("description")) r.description = d["description"].cast<std::string>();
  if (d.contains("duration")) r.duration = d["duration"].cast<double>();
  return r;
}

py::dict EstimateDict(const NoiseEstimate& e) {
  py::dict d;
  d["pnp_incorrect"] = py::make_tuple(e.pnp_incorrect.rate, e.pnp_incorrect.half_width);
  d["pnp_correct"] = py::make_tuple(e.pnp_correct.rate, e.pnp_correct.half_width);
  d["oov_share"] = e.oov_share;
  d["confidence"] = e.confidence;
  d["n"] = e.n;
  d["n_decided"] = e.n_decided;
  d["cell_half_widths"] = e.cell_half_widths;
  return d;
}

}  // namespace
}  // namespace clipcurate

PYBIND11_MODULE(_core, m) {
  using namespace clipcurate;
  m.doc() = "clipcurate core bindings";
  m.attr("__version__") = std::string(kToolVersion);

  py::register_exception<OntologyError>(m, "OntologyError", PyExc_ValueError);
  py::register_exception<ManifestError>(m, "ManifestError", PyExc_ValueError);
  py::register_exception<CurationError>(m, "CurationError", PyExc_ValueError);

  py::class_<Ontology>(m, "Ontology")
      .def_static("load", &Ontology::Load, py::arg("path"))
      .def_static("parse", &Ontology::Parse, py::arg("json_text"))
      .def("__len__", &Ontology::size)
      .def("__contains__", &Ontology::contains)
      .def("name", [](const Ontology& o, const std::string& id) { return o.node(id).name; })
      .def("description",
           [](const Ontology& o, const std::string& id) { return o.node(id).description; })
      .def("children",
           [](const Ontology& o, const std::string& id) { return o.node(id).child_ids; })
      .def("descendants", &Ontology::Descendants)
      .def("ancestors", &Ontology::Ancestors)
      .def("is_ancestor", &Ontology::IsAncestor);

  py::class_<TextPipeline>(m, "TextPipeline")
      .def(py::init([](const std::filesystem::path& lexicon, const std::filesystem::path& stop) {
             return TextPipeline(LemmaLexicon::Load(lexicon), StopWords::Load(stop));
           }),
           py::arg("lexicon"), py::arg("stop_words"))
      .def("tags", [](const TextPipeline& p,
                      const std::vector<std::string>& tags) { return p.Tags(tags).words; })
      .def("description",
           [](const TextPipeline& p, const std::string& text) { return p.Description(text).words; })
      .def("label",
           [](const TextPipeline& p, const std::string& name) { return p.Label(name).words; });

  m.def("tokenise", [](const std::string& text) { return Tokenise(text); }, py::arg("text"));

  py::class_<Labeler>(m, "Labeler")
      .def(py::init([](const Ontology& o, std::vector<std::string> labels, const TextPipeline& p) {
             return Labeler(o, LabelSet(std::move(labels)), p);
           }),
           py::arg("ontology"), py::arg("labels"), py::arg("pipeline"))
      .def_property_readonly("labels",
                             [](const Labeler& l) {
                               std::vector<std::string> out;
                               for (const auto& q : l.queries()) out.push_back(q.label_id);
                               return out;
                             })
      .def_property_readonly("vocabulary",
                             [](const Labeler& l) { return l.vocabulary().words(); })
      .def("query",
           [](const Labeler& l, std::size_t i) { return l.queries().at(i).words.words; })
      .def("scores",
           [](const Labeler& l, const py::dict& clip) { return l.Scores(RecordFromDict(clip)); },
           py::arg("clip"))
      .def(
          "best",
          [](const Labeler& l, const py::dict& clip) {
            ScoredClip s = l.Best(RecordFromDict(clip));
            return py::make_tuple(s.label_id, s.score);
          },
          py::arg("clip"))
      .def(
          "assign_all",
          [](const Labeler& l, const std::vector<py::dict>& clips, double tau, unsigned threads) {
            std::vector<ClipRecord> records;
            for (const auto& c : clips) records.push_back(RecordFromDict(c));
            std::vector<std::tuple<std::string, std::string, double>> out;
            py::gil_scoped_release release;
            for (const auto& s : l.AssignAll(records, tau, threads)) {
              out.emplace_back(s.clip_id, s.label_id, s.score);
            }
            return out;
          },
          py::arg("clips"), py::arg("tau") = kDefaultTau, py::arg("threads") = 1);

  py::enum_<Split>(m, "Split")
      .value("TRAIN", Split::kTrain)
      .value("VAL", Split::kVal)
      .value("TEST", Split::kTest);

  py::class_<DatasetManifest>(m, "Manifest")
      .def_static("read", &ReadManifest, py::arg("csv_path"))
      .def("write", [](const DatasetManifest& d, const std::filesystem::path& p) {
        EmitManifest(d, p);
      })
      .def_readonly("name", &DatasetManifest::name)
      .def("__len__", [](const DatasetManifest& d) { return d.entries.size(); })
      .def("entries",
           [](const DatasetManifest& d) {
             std::vector<std::tuple<std::string, std::string, std::string>> out;
             for (const auto& e : d.entries) {
               out.emplace_back(e.clip_id, e.label_id, std::string(SplitName(e.split)));
             }
             return out;
           })
      .def("counts", [](const DatasetManifest& d, Split s) { return d.CountsFor(s); })
      .def("label_ids", &DatasetManifest::LabelIds);

  m.def(
      "inject_noise",
      [](const DatasetManifest& d, const std::string& kind, double rho, std::uint64_t seed,
         double p_geometric) {
        LabelSet classes(d.LabelIds());
        return InjectSyntheticNoise(d, {ParseNoiseKind(kind), rho, p_geometric, seed}, classes);
      },
      py::arg("manifest"), py::arg("kind"), py::arg("rho"), py::arg("seed") = 0,
      py::arg("p_geometric") = 0.5);
  m.def("mix_substitution", &MixSubstitution, py::arg("clean"), py::arg("noisy"), py::arg("rho"),
        py::arg("seed") = 0, py::arg("reference_noise_rate") = kReferenceNoiseRate);
  m.def("selection_count", &SelectionCount, py::arg("rho"), py::arg("n"));

  m.def(
      "noise_breakdown",
      [](const std::array<double, kNumCategories>& proportions, std::size_t n, double tolerance) {
        return EstimateDict(
            NoiseBreakdown(JudgmentTable::FromProportions(proportions, n, tolerance)));
      },
      py::arg("proportions"), py::arg("n"), py::arg("tolerance") = 1e-9,
      "proportions in the order PP, PNP/IV, PNP/OOV, NP/IV, NP/OOV, U");
  m.def(
      "noise_breakdown_counts",
      [](const std::array<std::size_t, kNumCategories>& counts) {
        return EstimateDict(NoiseBreakdown(JudgmentTable::FromCounts(counts)));
      },
      py::arg("counts"));
  m.def("confidence_half_width", &ConfidenceHalfWidth, py::arg("p_hat"), py::arg("n"),
        py::arg("confidence") = 0.95);

  m.def(
      "verify_audio",
      [](const std::filesystem::path& path) {
        FormatReport r = VerifyAudioFormat(path);
        py::dict d;
        d["ok"] = r.ok();
        d["channels"] = r.channels;
        d["sample_rate"] = r.sample_rate;
        d["bits_per_sample"] = r.bits_per_sample;
        d["duration"] = r.duration;
        std::vector<std::string> fields;
        for (const auto& p : r.problems) fields.push_back(p.field);
        d["problems"] = fields;
        return d;
      },
      py::arg("path"));
  m.def(
      "encode_wav",
      [](std::uint16_t channels, std::uint32_t rate, std::uint16_t bits, std::uint64_t frames) {
        return py::bytes(EncodePcmWav(channels, rate, bits, frames));
      },
      py::arg("channels"), py::arg("sample_rate"), py::arg("bits_per_sample"), py::arg("frames"));
}
