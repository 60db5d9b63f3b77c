#include "czsl/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "czsl/util.hpp"

namespace czsl {

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> read_name_list(const std::filesystem::path& file) {
  std::vector<std::string> names;
  for (std::string& line : read_lines(file)) {
    if (!line.empty()) names.push_back(std::move(line));
  }
  return names;
}

std::vector<ConceptPair> read_pair_file(const std::filesystem::path& file,
                                        const ConceptVocabulary& vocab) {
  std::vector<ConceptPair> pairs;
  int line_no = 0;
  for (const std::string& line : read_lines(file)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string attr, obj, extra;
    if (!(ss >> attr >> obj) || (ss >> extra)) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) +
                       ": expected 'attribute object'");
    }
    if (!vocab.has_attr(attr)) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) +
                       ": unknown attribute '" + attr + "'");
    }
    if (!vocab.has_object(obj)) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) +
                       ": unknown object '" + obj + "'");
    }
    pairs.push_back({vocab.attr_id(attr), vocab.object_id(obj)});
  }
  return pairs;
}

std::vector<Sample> read_feature_file(const std::filesystem::path& file,
                                      const ConceptVocabulary& vocab, Index& dim_io) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  Index count = 0, dim = 0;
  if (!(in >> count >> dim) || count < 0 || dim <= 0) {
    throw ParseError(file.string() + ": malformed 'N D' header");
  }
  if (dim_io != 0 && dim != dim_io) {
    throw ParseError(file.string() + ": feature dimension " + std::to_string(dim) +
                     " does not match " + std::to_string(dim_io));
  }
  dim_io = dim;
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) {
    Sample s;
    std::string attr, obj;
    if (!(in >> s.id >> attr >> obj)) {
      throw ParseError(file.string() + ": truncated at sample " + std::to_string(i));
    }
    if (!vocab.has_attr(attr) || !vocab.has_object(obj)) {
      throw ParseError(file.string() + ": sample '" + s.id + "' has unknown label " +
                       attr + " " + obj);
    }
    s.label = {vocab.attr_id(attr), vocab.object_id(obj)};
    s.feature.resize(dim);
    for (Index d = 0; d < dim; ++d) {
      if (!(in >> s.feature(d))) {
        throw ParseError(file.string() + ": sample '" + s.id + "' has fewer than " +
                         std::to_string(dim) + " values");
      }
    }
    if (!all_finite(s.feature)) {
      throw ParseError(file.string() + ": sample '" + s.id + "' has non-finite values");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void check_labels_in(const std::vector<Sample>& samples,
                     const std::vector<ConceptPair>& allowed_a,
                     const std::vector<ConceptPair>& allowed_b, const char* partition) {
  std::unordered_set<ConceptPair, ConceptPairHash> allowed(allowed_a.begin(), allowed_a.end());
  allowed.insert(allowed_b.begin(), allowed_b.end());
  for (const Sample& s : samples) {
    if (!allowed.count(s.label)) {
      throw ParseError(std::string(partition) + " sample '" + s.id +
                       "' labeled with a pair outside its partition's split");
    }
  }
}

void append_pairs(std::string& out, const std::vector<ConceptPair>& pairs,
                  const ConceptVocabulary& vocab) {
  for (const ConceptPair& p : pairs) {
    out += vocab.attribute(p.attr);
    out += ' ';
    out += vocab.object(p.object);
    out += '\n';
  }
}

std::string canonical_serialization(const Dataset& ds) {
  std::string s;
  s += "attributes\n";
  for (const auto& a : ds.vocab.attributes()) s += a + "\n";
  s += "objects\n";
  for (const auto& o : ds.vocab.objects()) s += o + "\n";
  const std::pair<const char*, const std::vector<ConceptPair>*> sections[] = {
      {"train", &ds.split.train},         {"val_seen", &ds.split.val_seen},
      {"val_unseen", &ds.split.val_unseen}, {"test_seen", &ds.split.test_seen},
      {"test_unseen", &ds.split.test_unseen}};
  for (const auto& [name, pairs] : sections) {
    s += name;
    s += "\n";
    append_pairs(s, *pairs, ds.vocab);
  }
  const std::pair<const char*, const std::vector<Sample>*> parts[] = {
      {"train", &ds.samples.train}, {"val", &ds.samples.val}, {"test", &ds.samples.test}};
  for (const auto& [name, samples] : parts) {
    s += name;
    s += " ";
    s += std::to_string(samples->size());
    s += "\n";
    for (const Sample& smp : *samples) {
      s += smp.id + " " + ds.vocab.attribute(smp.label.attr) + " " +
           ds.vocab.object(smp.label.object);
      for (Index d = 0; d < smp.feature.size(); ++d) {
        s += " " + format_double(smp.feature(d));
      }
      s += "\n";
    }
  }
  return s;
}

void write_pair_file(const std::filesystem::path& file,
                     const std::vector<ConceptPair>& pairs,
                     const ConceptVocabulary& vocab) {
  std::ofstream out(file);
  for (const ConceptPair& p : pairs) {
    out << vocab.attribute(p.attr) << ' ' << vocab.object(p.object) << '\n';
  }
}

void write_feature_file(const std::filesystem::path& file,
                        const std::vector<Sample>& samples,
                        const ConceptVocabulary& vocab, Index dim) {
  std::ofstream out(file);
  out << samples.size() << ' ' << dim << '\n';
  for (const Sample& s : samples) {
    out << s.id << ' ' << vocab.attribute(s.label.attr) << ' '
        << vocab.object(s.label.object);
    for (Index d = 0; d < s.feature.size(); ++d) out << ' ' << format_double(s.feature(d));
    out << '\n';
  }
}

}  // namespace

ConceptVocabulary::ConceptVocabulary(std::vector<std::string> attributes,
                                     std::vector<std::string> objects)
    : attributes_(std::move(attributes)), objects_(std::move(objects)) {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (!attr_ids_.emplace(attributes_[i], static_cast<int>(i)).second) {
      throw VocabularyError("duplicate attribute '" + attributes_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    if (!obj_ids_.emplace(objects_[i], static_cast<int>(i)).second) {
      throw VocabularyError("duplicate object '" + objects_[i] + "'");
    }
  }
}

const std::string& ConceptVocabulary::attribute(int id) const {
  if (id < 0 || id >= attr_count()) throw IndexError("attribute id " + std::to_string(id));
  return attributes_[static_cast<std::size_t>(id)];
}

const std::string& ConceptVocabulary::object(int id) const {
  if (id < 0 || id >= object_count()) throw IndexError("object id " + std::to_string(id));
  return objects_[static_cast<std::size_t>(id)];
}

int ConceptVocabulary::attr_id(const std::string& name) const {
  auto it = attr_ids_.find(name);
  if (it == attr_ids_.end()) throw VocabularyError("unknown attribute '" + name + "'");
  return it->second;
}

int ConceptVocabulary::object_id(const std::string& name) const {
  auto it = obj_ids_.find(name);
  if (it == obj_ids_.end()) throw VocabularyError("unknown object '" + name + "'");
  return it->second;
}

void PairSplit::validate(const ConceptVocabulary& vocab) const {
  auto check_range = [&](const std::vector<ConceptPair>& pairs, const char* name) {
    for (const ConceptPair& p : pairs) {
      if (p.attr < 0 || p.attr >= vocab.attr_count() || p.object < 0 ||
          p.object >= vocab.object_count()) {
        throw IndexError(std::string(name) + ": pair (" + std::to_string(p.attr) + "," +
                         std::to_string(p.object) + ") outside vocabulary");
      }
    }
  };
  check_range(train, "train");
  check_range(val_seen, "val_seen");
  check_range(val_unseen, "val_unseen");
  check_range(test_seen, "test_seen");
  check_range(test_unseen, "test_unseen");
  if (train.empty()) throw ParseError("train pair list is empty");

  std::unordered_set<ConceptPair, ConceptPairHash> seen(train.begin(), train.end());
  for (const ConceptPair& p : val_unseen) {
    if (seen.count(p)) {
      throw ParseError("val_unseen pair (" + vocab.attribute(p.attr) + ", " +
                       vocab.object(p.object) + ") appears in train");
    }
  }
  for (const ConceptPair& p : test_unseen) {
    if (seen.count(p)) {
      throw ParseError("test_unseen pair (" + vocab.attribute(p.attr) + ", " +
                       vocab.object(p.object) + ") appears in train");
    }
  }
}

bool PairSplit::is_seen(const ConceptPair& p) const {
  return std::find(train.begin(), train.end(), p) != train.end();
}

WordEmbeddingTable::WordEmbeddingTable(std::unordered_map<std::string, Vector> vectors,
                                       Index dim)
    : vectors_(std::move(vectors)), dim_(dim) {}

WordEmbeddingTable WordEmbeddingTable::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open " + file.string());
  std::unordered_map<std::string, Vector> vectors;
  Index dim = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<Scalar> values;
    Scalar v;
    while (ss >> v) values.push_back(v);
    if (values.empty()) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) +
                       ": token without vector");
    }
    if (dim == 0) dim = static_cast<Index>(values.size());
    if (static_cast<Index>(values.size()) != dim) {
      throw ParseError(file.string() + ":" + std::to_string(line_no) +
                       ": inconsistent embedding width");
    }
    Vector vec(dim);
    for (Index i = 0; i < dim; ++i) vec(i) = values[static_cast<std::size_t>(i)];
    vectors[token] = std::move(vec);
  }
  return WordEmbeddingTable(std::move(vectors), dim);
}

std::string WordEmbeddingTable::canonicalize(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (char ch : name) {
    if (ch == '_') {
      out.push_back(' ');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

Vector WordEmbeddingTable::lookup(const std::string& name) const {
  const std::string canon = canonicalize(name);
  auto direct = vectors_.find(canon);
  if (direct != vectors_.end()) return direct->second;

  // Multi-token names average their token vectors.
  std::istringstream ss(canon);
  std::string token;
  Vector sum = Vector::Zero(dim_);
  int count = 0;
  while (ss >> token) {
    auto it = vectors_.find(token);
    if (it == vectors_.end()) {
      throw VocabularyError("word embedding missing for token '" + token + "' of '" +
                            name + "'");
    }
    sum += it->second;
    ++count;
  }
  if (count == 0) throw VocabularyError("empty concept name");
  return sum / static_cast<Scalar>(count);
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  ds.vocab = ConceptVocabulary(read_name_list(dir / "attributes.txt"),
                               read_name_list(dir / "objects.txt"));
  ds.split.train = read_pair_file(dir / "train_pairs.txt", ds.vocab);
  ds.split.val_seen = read_pair_file(dir / "val_pairs_seen.txt", ds.vocab);
  ds.split.val_unseen = read_pair_file(dir / "val_pairs_unseen.txt", ds.vocab);
  ds.split.test_seen = read_pair_file(dir / "test_pairs_seen.txt", ds.vocab);
  ds.split.test_unseen = read_pair_file(dir / "test_pairs_unseen.txt", ds.vocab);
  ds.split.validate(ds.vocab);

  Index dim = 0;
  ds.samples.train = read_feature_file(dir / "features_train.txt", ds.vocab, dim);
  ds.samples.val = read_feature_file(dir / "features_val.txt", ds.vocab, dim);
  ds.samples.test = read_feature_file(dir / "features_test.txt", ds.vocab, dim);
  ds.samples.feature_dim = dim;
  check_labels_in(ds.samples.train, ds.split.train, {}, "train");
  check_labels_in(ds.samples.val, ds.split.val_seen, ds.split.val_unseen, "val");
  check_labels_in(ds.samples.test, ds.split.test_seen, ds.split.test_unseen, "test");

  const auto emb = dir / "embeddings.txt";
  if (std::filesystem::exists(emb)) {
    ds.words = WordEmbeddingTable::load(emb);
    ds.has_word_embeddings = true;
  }
  ds.content_hash = sha256_hex(canonical_serialization(ds));
  return ds;
}

std::string Dataset::summary() const {
  std::ostringstream out;
  out << "attributes=" << vocab.attr_count() << " objects=" << vocab.object_count()
      << " train_pairs=" << split.train.size() << " val_pairs=" << split.val_seen.size()
      << "+" << split.val_unseen.size() << " test_pairs=" << split.test_seen.size() << "+"
      << split.test_unseen.size() << " samples=" << samples.train.size() << "/"
      << samples.val.size() << "/" << samples.test.size()
      << " feature_dim=" << samples.feature_dim;
  return out.str();
}

WorldMode parse_world_mode(const std::string& s) {
  if (s == "closed") return WorldMode::Closed;
  if (s == "open") return WorldMode::Open;
  throw ConfigError("mode must be 'closed' or 'open', got '" + s + "'");
}

std::vector<ConceptPair> target_set(const PairSplit& split, WorldMode mode,
                                    const ConceptVocabulary& vocab) {
  std::vector<ConceptPair> target;
  if (mode == WorldMode::Closed) {
    std::unordered_set<ConceptPair, ConceptPairHash> present;
    for (const auto& list : {split.test_seen, split.test_unseen}) {
      for (const ConceptPair& p : list) {
        if (present.insert(p).second) target.push_back(p);
      }
    }
  } else {
    target.reserve(static_cast<std::size_t>(vocab.attr_count()) *
                   static_cast<std::size_t>(vocab.object_count()));
    for (int a = 0; a < vocab.attr_count(); ++a) {
      for (int o = 0; o < vocab.object_count(); ++o) target.push_back({a, o});
    }
  }
  return target;
}

void SyntheticConfig::validate() const {
  if (attrs < 1 || objects < 1 || attrs * objects < 4) {
    throw ConfigError("need attrs*objects >= 4");
  }
  if (!(seen_ratio > 0.0 && seen_ratio < 1.0)) {
    throw ConfigError("seen_ratio must lie in (0,1)");
  }
  const int total = attrs * objects;
  const int seen = static_cast<int>(std::floor(seen_ratio * total + 0.5));
  if (seen < 1 || seen > total - 1) {
    throw ConfigError("seen_ratio " + std::to_string(seen_ratio) +
                      " leaves no usable seen/unseen partition");
  }
  if (feature_dim < 2 || feature_dim % 2 != 0) {
    throw ConfigError("feature_dim must be even and >= 2");
  }
  if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
  if (train_per_pair < 1 || eval_per_pair < 1) {
    throw ConfigError("samples per pair must be >= 1");
  }
  if (word_dim < 1) throw ConfigError("word_dim must be >= 1");
}

Vector blend_feature(const Matrix& attr_latents, const Matrix& obj_latents, int attr,
                     int object) {
  Vector f(attr_latents.cols() + obj_latents.cols());
  f.head(attr_latents.cols()) = attr_latents.row(attr).transpose();
  f.tail(obj_latents.cols()) = obj_latents.row(object).transpose();
  return f;
}

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  const int n = cfg.attrs, m = cfg.objects;
  auto pad_name = [](const char* prefix, int i, int count) {
    const int width = count > 100 ? 3 : 2;
    std::string num = std::to_string(i);
    while (static_cast<int>(num.size()) < width) num.insert(num.begin(), '0');
    return std::string(prefix) + num;
  };
  std::vector<std::string> attrs, objs;
  for (int i = 0; i < n; ++i) attrs.push_back(pad_name("attr", i, n));
  for (int i = 0; i < m; ++i) objs.push_back(pad_name("obj", i, m));

  SyntheticDataset out;
  out.vocab = ConceptVocabulary(std::move(attrs), std::move(objs));

  std::vector<ConceptPair> all;
  for (int a = 0; a < n; ++a)
    for (int o = 0; o < m; ++o) all.push_back({a, o});
  std::shuffle(all.begin(), all.end(), rng);

  const int seen_count = static_cast<int>(std::floor(cfg.seen_ratio * n * m + 0.5));

  // Prefer pairs introducing an uncovered attribute or object so that every
  // element concept appears in training whenever the budget allows.
  std::vector<bool> attr_covered(static_cast<std::size_t>(n), false);
  std::vector<bool> obj_covered(static_cast<std::size_t>(m), false);
  std::vector<ConceptPair> seen, rest;
  for (const ConceptPair& p : all) {
    if (static_cast<int>(seen.size()) < seen_count &&
        (!attr_covered[static_cast<std::size_t>(p.attr)] ||
         !obj_covered[static_cast<std::size_t>(p.object)])) {
      seen.push_back(p);
      attr_covered[static_cast<std::size_t>(p.attr)] = true;
      obj_covered[static_cast<std::size_t>(p.object)] = true;
    } else {
      rest.push_back(p);
    }
  }
  for (const ConceptPair& p : rest) {
    if (static_cast<int>(seen.size()) >= seen_count) break;
    seen.push_back(p);
  }
  std::vector<ConceptPair> unseen;
  {
    std::unordered_set<ConceptPair, ConceptPairHash> seen_set(seen.begin(), seen.end());
    for (const ConceptPair& p : all) {
      if (!seen_set.count(p)) unseen.push_back(p);
    }
  }

  out.split.train = seen;
  out.split.val_seen = seen;
  out.split.test_seen = seen;
  if (unseen.size() == 1) {
    // A single unseen pair serves both protocols.
    out.split.val_unseen = unseen;
    out.split.test_unseen = unseen;
  } else {
    for (std::size_t i = 0; i < unseen.size(); ++i) {
      (i % 2 == 0 ? out.split.val_unseen : out.split.test_unseen).push_back(unseen[i]);
    }
  }
  out.split.validate(out.vocab);

  const Index half = cfg.feature_dim / 2;
  out.attr_latents = gaussian_matrix(rng, n, half);
  out.obj_latents = gaussian_matrix(rng, m, half);
  out.word_vectors = gaussian_matrix(rng, n + m, cfg.word_dim);

  std::normal_distribution<Scalar> noise(0.0, 1.0);
  auto make_samples = [&](const std::vector<ConceptPair>& pairs, int per_pair,
                          const char* prefix) {
    std::vector<Sample> samples;
    int idx = 0;
    for (const ConceptPair& p : pairs) {
      for (int i = 0; i < per_pair; ++i) {
        Sample s;
        s.id = std::string(prefix) + "_" + std::to_string(idx++);
        s.label = p;
        s.feature = blend_feature(out.attr_latents, out.obj_latents, p.attr, p.object);
        for (Index d = 0; d < s.feature.size(); ++d) {
          s.feature(d) += cfg.noise_sigma * noise(rng);
        }
        samples.push_back(std::move(s));
      }
    }
    return samples;
  };

  out.samples.train = make_samples(out.split.train, cfg.train_per_pair, "train");
  std::vector<ConceptPair> val_pairs = out.split.val_seen;
  val_pairs.insert(val_pairs.end(), out.split.val_unseen.begin(), out.split.val_unseen.end());
  out.samples.val = make_samples(val_pairs, cfg.eval_per_pair, "val");
  std::vector<ConceptPair> test_pairs = out.split.test_seen;
  test_pairs.insert(test_pairs.end(), out.split.test_unseen.begin(),
                    out.split.test_unseen.end());
  out.samples.test = make_samples(test_pairs, cfg.eval_per_pair, "test");
  out.samples.feature_dim = cfg.feature_dim;
  return out;
}

void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "attributes.txt");
    for (const auto& a : data.vocab.attributes()) out << a << '\n';
  }
  {
    std::ofstream out(dir / "objects.txt");
    for (const auto& o : data.vocab.objects()) out << o << '\n';
  }
  write_pair_file(dir / "train_pairs.txt", data.split.train, data.vocab);
  write_pair_file(dir / "val_pairs_seen.txt", data.split.val_seen, data.vocab);
  write_pair_file(dir / "val_pairs_unseen.txt", data.split.val_unseen, data.vocab);
  write_pair_file(dir / "test_pairs_seen.txt", data.split.test_seen, data.vocab);
  write_pair_file(dir / "test_pairs_unseen.txt", data.split.test_unseen, data.vocab);
  write_feature_file(dir / "features_train.txt", data.samples.train, data.vocab,
                     data.samples.feature_dim);
  write_feature_file(dir / "features_val.txt", data.samples.val, data.vocab,
                     data.samples.feature_dim);
  write_feature_file(dir / "features_test.txt", data.samples.test, data.vocab,
                     data.samples.feature_dim);
  {
    std::ofstream out(dir / "embeddings.txt");
    for (int i = 0; i < data.vocab.attr_count(); ++i) {
      out << WordEmbeddingTable::canonicalize(data.vocab.attribute(i));
      for (Index d = 0; d < data.word_vectors.cols(); ++d) {
        out << ' ' << format_double(data.word_vectors(i, d));
      }
      out << '\n';
    }
    for (int i = 0; i < data.vocab.object_count(); ++i) {
      out << WordEmbeddingTable::canonicalize(data.vocab.object(i));
      for (Index d = 0; d < data.word_vectors.cols(); ++d) {
        out << ' ' << format_double(data.word_vectors(data.vocab.attr_count() + i, d));
      }
      out << '\n';
    }
  }
}

}  // namespace czsl
