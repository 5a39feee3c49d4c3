#include "cefr/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cefr/errors.hpp"
#include "cefr/rng.hpp"
#include "cefr/textproc.hpp"
#include "cefr/utf8.hpp"

namespace cefr {

using nlohmann::json;

LabelScheme::LabelScheme(std::string name, std::vector<std::string> labels)
    : name_(std::move(name)), labels_(std::move(labels)) {
    if (labels_.size() < 2) throw DataError("label scheme needs at least 2 labels");
    std::unordered_set<std::string> seen;
    for (const std::string& l : labels_) {
        if (l.empty()) throw DataError("label scheme contains an empty label");
        if (!seen.insert(l).second) throw DataError("duplicate label: " + l);
    }
}

bool LabelScheme::contains(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t LabelScheme::rank(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw DataError("label '" + label + "' not in scheme '" + name_ + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

const std::string& LabelScheme::label_at(std::size_t rank) const {
    if (rank >= labels_.size()) throw DataError("label rank out of range");
    return labels_[rank];
}

LabelScheme LabelScheme::cefr() {
    return LabelScheme("cefr", {"A1", "A2", "B1", "B2", "C1", "C2"});
}

LabelScheme LabelScheme::ljl() {
    return LabelScheme("ljl", {"level1", "level2", "level3", "level4"});
}

LabelScheme LabelScheme::by_name(const std::string& name) {
    if (name == "cefr") return cefr();
    if (name == "ljl") return ljl();
    throw UsageError("unknown scheme '" + name + "' (expected: cefr, ljl)");
}

CorpusFormat format_from_name(const std::string& name) {
    if (name == "csv") return CorpusFormat::Csv;
    if (name == "jsonl") return CorpusFormat::Jsonl;
    throw UsageError("unknown corpus format '" + name + "' (expected: csv, jsonl)");
}

CorpusFormat format_from_path(const std::string& path) {
    if (path.size() >= 6 && path.ends_with(".jsonl")) return CorpusFormat::Jsonl;
    return CorpusFormat::Csv;
}

namespace {

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

// RFC-4180 style CSV: quoted fields may contain commas, newlines, and
// doubled-up quotes. Parses the whole file so multi-line texts round-trip.
std::vector<std::vector<std::string>> parse_csv(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(fields));
        fields.clear();
    };
    while (i < content.size()) {
        char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (quoted) {
        throw DataError("row " + std::to_string(rows.size() + 1) + ": unterminated quote");
    }
    if (field_started || !fields.empty()) end_row();
    // Drop trailing blank rows from terminating newlines.
    while (!rows.empty() && rows.back().size() == 1 && rows.back()[0].empty()) {
        rows.pop_back();
    }
    return rows;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void validate_and_add(Corpus& corpus, LabeledText item, std::size_t row_no,
                      std::unordered_set<std::string>& ids) {
    if (item.id.empty()) {
        throw DataError("row " + std::to_string(row_no) + ": empty id");
    }
    if (is_blank(item.text)) {
        throw DataError("row " + std::to_string(row_no) + ": empty text (id '" +
                        item.id + "')");
    }
    if (item.label && !corpus.scheme.contains(*item.label)) {
        throw DataError("row " + std::to_string(row_no) + ": unknown label '" +
                        *item.label + "' under scheme '" + corpus.scheme.name() + "'");
    }
    if (!ids.insert(item.id).second) {
        throw DataError("row " + std::to_string(row_no) + ": duplicate id '" +
                        item.id + "'");
    }
    corpus.items.push_back(std::move(item));
}

}  // namespace

Corpus load_corpus(const std::string& path, CorpusFormat format,
                   const LabelScheme& scheme) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);

    Corpus corpus{scheme, {}};
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t row_no = 0;

    if (format == CorpusFormat::Csv) {
        std::stringstream buffer;
        buffer << in.rdbuf();
        const auto rows = parse_csv(buffer.str());
        if (rows.empty()) throw DataError("empty CSV file: " + path);
        if (rows.front() != std::vector<std::string>{"id", "text", "label", "source"}) {
            throw DataError("bad CSV header in " + path +
                            " (expected: id,text,label,source)");
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
            row_no = r + 1;
            const auto& fields = rows[r];
            if (fields.size() == 1 && fields[0].empty()) continue;
            if (fields.size() != 4) {
                throw DataError("row " + std::to_string(row_no) + ": expected 4 fields, got " +
                                std::to_string(fields.size()));
            }
            LabeledText item;
            item.id = fields[0];
            item.text = fields[1];
            if (!fields[2].empty()) item.label = fields[2];
            item.source = fields[3];
            validate_and_add(corpus, std::move(item), row_no, ids);
        }
    } else {
        while (std::getline(in, line)) {
            ++row_no;
            if (is_blank(line)) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::exception& e) {
                throw DataError("row " + std::to_string(row_no) + ": bad JSON: " + e.what());
            }
            if (!obj.is_object()) {
                throw DataError("row " + std::to_string(row_no) + ": expected a JSON object");
            }
            LabeledText item;
            try {
                item.id = obj.at("id").get<std::string>();
                item.text = obj.at("text").get<std::string>();
                item.source = obj.value("source", std::string());
                if (obj.contains("label") && !obj["label"].is_null()) {
                    const std::string label = obj["label"].get<std::string>();
                    if (!label.empty()) item.label = label;
                }
            } catch (const json::exception& e) {
                throw DataError("row " + std::to_string(row_no) + ": " + e.what());
            }
            validate_and_add(corpus, std::move(item), row_no, ids);
        }
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path, CorpusFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus file: " + path);
    if (format == CorpusFormat::Csv) {
        out << "id,text,label,source\n";
        for (const LabeledText& item : corpus.items) {
            out << csv_escape(item.id) << ',' << csv_escape(item.text) << ','
                << csv_escape(item.label.value_or("")) << ',' << csv_escape(item.source)
                << '\n';
        }
    } else {
        for (const LabeledText& item : corpus.items) {
            json obj{{"id", item.id}, {"text", item.text}, {"source", item.source}};
            if (item.label) obj["label"] = *item.label;
            else obj["label"] = nullptr;
            out << obj.dump() << '\n';
        }
    }
}

CorpusStats corpus_stats(const Corpus& corpus) {
    CorpusStats stats;
    stats.n_items = corpus.items.size();
    for (const LabeledText& item : corpus.items) {
        stats.n_words += tokenize_words(item.text).size();
        stats.n_chars += utf8::count_codepoints(item.text);
        if (item.label) ++stats.per_label_counts[*item.label];
    }
    return stats;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double train_fraction,
                                       std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw UsageError("train fraction must be in (0,1)");
    }
    // Strata in scheme order, unlabeled items last.
    std::map<std::size_t, std::vector<std::size_t>> strata;
    const std::size_t unlabeled_key = corpus.scheme.size();
    for (std::size_t i = 0; i < corpus.items.size(); ++i) {
        const auto& label = corpus.items[i].label;
        strata[label ? corpus.scheme.rank(*label) : unlabeled_key].push_back(i);
    }
    std::vector<bool> in_train(corpus.items.size(), false);
    Rng rng(seed);
    for (auto& [rank, indices] : strata) {
        if (indices.size() < 2) {
            const std::string name =
                rank == unlabeled_key ? "(unlabeled)" : corpus.scheme.label_at(rank);
            throw DataError("stratum '" + name + "' has fewer than 2 items");
        }
        const auto n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(indices.size())));
        rng.shuffle(indices);
        for (std::size_t k = 0; k < n_train && k < indices.size(); ++k) {
            in_train[indices[k]] = true;
        }
    }
    Corpus train{corpus.scheme, {}};
    Corpus test{corpus.scheme, {}};
    for (std::size_t i = 0; i < corpus.items.size(); ++i) {
        (in_train[i] ? train : test).items.push_back(corpus.items[i]);
    }
    return {std::move(train), std::move(test)};
}

Corpus sample_eval_set(const std::vector<Corpus>& corpora, std::size_t per_level,
                       const std::vector<std::string>& levels, std::uint64_t seed) {
    if (corpora.empty()) throw UsageError("no source corpora given");
    const LabelScheme& scheme = corpora.front().scheme;
    for (const Corpus& c : corpora) {
        if (!(c.scheme == scheme)) throw DataError("source corpora use different schemes");
    }
    Corpus out{scheme, {}};
    std::unordered_set<std::string> ids;
    Rng rng(seed);
    for (std::size_t ci = 0; ci < corpora.size(); ++ci) {
        const Corpus& src = corpora[ci];
        for (const std::string& level : levels) {
            scheme.rank(level);  // validates
            std::vector<std::size_t> matching;
            for (std::size_t i = 0; i < src.items.size(); ++i) {
                if (src.items[i].label == level) matching.push_back(i);
            }
            if (matching.size() < per_level) {
                throw DataError("corpus #" + std::to_string(ci) + " has only " +
                                std::to_string(matching.size()) + " items at level '" +
                                level + "' (need " + std::to_string(per_level) + ")");
            }
            rng.shuffle(matching);
            for (std::size_t k = 0; k < per_level; ++k) {
                const LabeledText& item = src.items[matching[k]];
                if (!ids.insert(item.id).second) {
                    throw DataError("id collision across source corpora: '" + item.id + "'");
                }
                out.items.push_back(item);
            }
        }
    }
    return out;
}

}  // namespace cefr
