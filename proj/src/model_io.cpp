#include <fstream>
#include <sstream>

#include <json.hpp>

#include "logad/error.hpp"
#include "logad/pipeline.hpp"
#include "serialization.hpp"

namespace logad {

using nlohmann::json;

namespace {

constexpr const char* kModelFormatName = "logad-model";

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.data.size() != m.rows * m.cols) throw Error(ErrorKind::Format, "matrix data length does not match its shape");
  return m;
}

}  // namespace

bool ModelFile::operator==(const ModelFile& other) const {
  return version == other.version && source_id == other.source_id &&
         config_to_json(config) == config_to_json(other.config) && stop_words.words == other.stop_words.words &&
         embedding == other.embedding && hmm == other.hmm;
}

std::string serialize_model(const ModelFile& model) {
  json vocab = json::array();
  for (std::size_t i = 0; i < model.embedding.vocab.size(); ++i) {
    vocab.push_back({model.embedding.vocab.token(static_cast<TokenId>(i)), model.embedding.vocab.count(static_cast<TokenId>(i))});
  }
  json stops = json::array();
  for (const auto& w : model.stop_words.words) stops.push_back(w);

  const json j = {
      {"format", kModelFormatName},
      {"version", model.version},
      {"source_id", model.source_id},
      {"config", config_to_json(model.config)},
      {"stop_words", stops},
      {"embedding",
       {{"dim", model.embedding.dim},
        {"vocabulary", vocab},
        {"input", matrix_to_json(model.embedding.input)},
        {"output", matrix_to_json(model.embedding.output)}}},
      {"hmm",
       {{"states", model.hmm.n_states()},
        {"dim", model.hmm.dim()},
        {"initial", model.hmm.initial},
        {"transition", matrix_to_json(model.hmm.transition)},
        {"means", matrix_to_json(model.hmm.means)},
        {"variances", matrix_to_json(model.hmm.variances)},
        {"var_floor", model.hmm.var_floor}}},
  };
  return j.dump(1) + "\n";
}

ModelFile deserialize_model(const std::string& text) {
  ModelFile model;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormatName) throw Error(ErrorKind::Format, "not a logad model file");
    model.version = j.at("version").get<int>();
    if (model.version != kModelFormatVersion) {
      throw Error(ErrorKind::Format, "unsupported model version " + std::to_string(model.version));
    }
    model.source_id = j.at("source_id").get<std::string>();
    model.config = config_from_json(j.at("config"));
    for (const auto& w : j.at("stop_words")) model.stop_words.words.insert(w.get<std::string>());

    const json& e = j.at("embedding");
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (const auto& r : e.at("vocabulary")) rows.emplace_back(r.at(0).get<std::string>(), r.at(1).get<std::uint64_t>());
    model.embedding.vocab = Vocabulary::from_rows(std::move(rows));
    model.embedding.dim = e.at("dim").get<std::size_t>();
    model.embedding.input = matrix_from_json(e.at("input"));
    model.embedding.output = matrix_from_json(e.at("output"));
    const std::size_t v = model.embedding.vocab.size();
    for (const Matrix* m : {&model.embedding.input, &model.embedding.output}) {
      if (m->rows != v || m->cols != model.embedding.dim) throw Error(ErrorKind::Format, "embedding matrix shape mismatch");
    }

    const json& h = j.at("hmm");
    model.hmm.initial = h.at("initial").get<std::vector<double>>();
    model.hmm.transition = matrix_from_json(h.at("transition"));
    model.hmm.means = matrix_from_json(h.at("means"));
    model.hmm.variances = matrix_from_json(h.at("variances"));
    model.hmm.var_floor = h.at("var_floor").get<double>();
    if (h.at("states").get<std::size_t>() != model.hmm.n_states() || h.at("dim").get<std::size_t>() != model.hmm.dim()) {
      throw Error(ErrorKind::Format, "HMM header disagrees with its matrices");
    }
    model.hmm.validate();
    if (model.hmm.dim() != model.embedding.dim) {
      throw Error(ErrorKind::DimensionMismatch, "HMM dimension differs from embedding dimension");
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::Format, std::string("malformed model file: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::InvalidArgument || ex.kind() == ErrorKind::Config) {
      throw Error(ErrorKind::Format, std::string("malformed model file: ") + ex.what());
    }
    throw;
  }
  return model;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "error reading " + path.string());
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "error writing " + path.string());
}

void save_model(const ModelFile& model, const std::filesystem::path& path) { write_file(path, serialize_model(model)); }

ModelFile load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace logad
