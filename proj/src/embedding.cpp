#include "euc/embedding.hpp"

#include <cctype>
#include <cstdint>

namespace euc {

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string normalize_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // also trims leading whitespace
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(std::tolower(c)));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace

HashNgramEmbedder::HashNgramEmbedder(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("embedder dimension must be >= 1");
}

Eigen::VectorXd HashNgramEmbedder::embed(const std::string& text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  const std::string norm = normalize_text(text);
  if (norm.empty()) return v;
  const std::string_view sv = norm;
  if (sv.size() < 3) {
    v[fnv1a(sv) % dim_] += 1.0;
  } else {
    for (size_t i = 0; i + 3 <= sv.size(); ++i)
      v[fnv1a(sv.substr(i, 3)) % dim_] += 1.0;
  }
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

ProviderKind provider_kind_from_string(const std::string& name) {
  if (name == "hash-ngram" || name == "hash_ngram")
    return ProviderKind::hash_ngram;
  if (name == "precomputed") return ProviderKind::precomputed;
  throw std::invalid_argument("unknown embedding provider '" + name +
                              "' (expected hash-ngram or precomputed)");
}

std::string_view to_string(ProviderKind kind) {
  return kind == ProviderKind::hash_ngram ? "hash-ngram" : "precomputed";
}

Embeddings::Embeddings(ProviderKind kind, int dim)
    : kind_(kind), hasher_(dim) {}

Eigen::VectorXd Embeddings::for_text(const std::string& text) const {
  return hasher_.embed(text);
}

Eigen::VectorXd Embeddings::for_element(const LayoutElement& element) const {
  if (kind_ == ProviderKind::precomputed && element.embedding) {
    if (element.embedding->size() != dimension())
      throw std::invalid_argument("element " + element.element_id +
                                  ": stored embedding dimension " +
                                  std::to_string(element.embedding->size()) +
                                  " != run dimension " +
                                  std::to_string(dimension()));
    return *element.embedding;
  }
  return hasher_.embed(element.text);
}

Eigen::VectorXd Embeddings::for_members(
    const std::vector<const LayoutElement*>& members,
    const std::string& joined_text) const {
  if (kind_ == ProviderKind::precomputed) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension());
    int found = 0;
    for (const LayoutElement* m : members) {
      if (m->embedding) {
        if (m->embedding->size() != dimension())
          throw std::invalid_argument("element " + m->element_id +
                                      ": stored embedding dimension mismatch");
        sum += *m->embedding;
        ++found;
      }
    }
    if (found > 0) {
      sum /= static_cast<double>(found);
      const double n = sum.norm();
      if (n > 0.0) sum /= n;
      return sum;
    }
  }
  return hasher_.embed(joined_text);
}

}  // namespace euc
