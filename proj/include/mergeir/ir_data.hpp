#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "mergeir/error.hpp"

namespace mergeir {

struct DocEntry {
    std::string title;  // may be empty
    std::string text;
};

/// BEIR-style document collection. Map keys give deterministic iteration.
struct Corpus {
    std::map<std::string, DocEntry> docs;

    /// The text both retrieval modes operate on.
    static std::string full_text(const DocEntry& d) {
        return d.title + " " + d.text;
    }
};

struct QuerySet {
    std::map<std::string, std::string> queries;
};

/// Graded relevance judgments, (query_id, doc_id) -> grade >= 0.
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;

    int grade(const std::string& qid, const std::string& did) const {
        auto q = judgments.find(qid);
        if (q == judgments.end()) {
            return 0;
        }
        auto d = q->second.find(did);
        return d == q->second.end() ? 0 : d->second;
    }

    bool has_positive(const std::string& qid) const {
        auto q = judgments.find(qid);
        if (q == judgments.end()) {
            return false;
        }
        for (const auto& [did, g] : q->second) {
            if (g > 0) {
                return true;
            }
        }
        return false;
    }
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

/// Per-query ranked lists. Lists produced by this library are sorted by
/// (score desc, doc_id asc) and duplicate-free.
struct Run {
    std::map<std::string, std::vector<ScoredDoc>> rankings;
    std::string tag = "mergeir";
};

/// The ordering law every produced ranking obeys.
inline bool scored_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.doc_id < b.doc_id;
}

inline void sort_ranking(std::vector<ScoredDoc>& docs) {
    std::sort(docs.begin(), docs.end(), scored_before);
}

/// Test/debug helper: throws unless the run satisfies the ordering law and
/// per-query doc ids are unique.
inline void validate_run(const Run& run) {
    for (const auto& [qid, docs] : run.rankings) {
        for (std::size_t i = 0; i + 1 < docs.size(); ++i) {
            require(scored_before(docs[i], docs[i + 1]), "run: query '", qid,
                    "' violates (score desc, doc_id asc) at rank ", i + 1);
        }
    }
}

namespace detail {

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '", path, "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    require(!in.bad(), "read from '", path, "' failed");
    return lines;
}

inline bool blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
}

inline nlohmann::json parse_jsonl_line(const std::string& path, std::size_t lineno,
                                       const std::string& line) {
    try {
        nlohmann::json j = nlohmann::json::parse(line);
        require(j.is_object(), path, " line ", lineno, ": not a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        fail(path, " line ", lineno, ": ", e.what());
    }
}

inline std::string require_string_field(const nlohmann::json& j,
                                        const char* field,
                                        const std::string& path,
                                        std::size_t lineno) {
    require(j.contains(field) && j[field].is_string(), path, " line ", lineno,
            ": missing string field \"", field, "\"");
    return j[field].get<std::string>();
}

}  // namespace detail

/// JSON-lines corpus: {"_id": str, "title": str?, "text": str} per line.
inline Corpus load_corpus(const std::string& path) {
    Corpus corpus;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::blank(lines[i])) {
            continue;
        }
        const auto j = detail::parse_jsonl_line(path, i + 1, lines[i]);
        DocEntry d;
        const std::string id = detail::require_string_field(j, "_id", path, i + 1);
        d.text = detail::require_string_field(j, "text", path, i + 1);
        if (j.contains("title") && !j["title"].is_null()) {
            require(j["title"].is_string(), path, " line ", i + 1,
                    ": \"title\" is not a string");
            d.title = j["title"].get<std::string>();
        }
        auto [it, inserted] = corpus.docs.emplace(id, std::move(d));
        require(inserted, path, " line ", i + 1, ": duplicate doc_id '", id, "'");
    }
    require(!corpus.docs.empty(), path, ": corpus has no documents");
    return corpus;
}

/// JSON-lines queries: {"_id": str, "text": str} per line.
inline QuerySet load_queries(const std::string& path) {
    QuerySet qs;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::blank(lines[i])) {
            continue;
        }
        const auto j = detail::parse_jsonl_line(path, i + 1, lines[i]);
        const std::string id = detail::require_string_field(j, "_id", path, i + 1);
        std::string text = detail::require_string_field(j, "text", path, i + 1);
        auto [it, inserted] = qs.queries.emplace(id, std::move(text));
        require(inserted, path, " line ", i + 1, ": duplicate query_id '", id,
                "'");
    }
    return qs;
}

/// TREC qrels: "qid iter docid grade", iter ignored. Empty file is valid.
inline Qrels load_qrels(const std::string& path) {
    Qrels qrels;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::blank(lines[i])) {
            continue;
        }
        std::istringstream ss(lines[i]);
        std::string qid, iter, did, grade_str, extra;
        ss >> qid >> iter >> did >> grade_str;
        require(!grade_str.empty() && !(ss >> extra), path, " line ", i + 1,
                ": expected 'qid iter docid grade'");
        int grade = 0;
        const auto [ptr, ec] = std::from_chars(
            grade_str.data(), grade_str.data() + grade_str.size(), grade);
        require(ec == std::errc{} && ptr == grade_str.data() + grade_str.size(),
                path, " line ", i + 1, ": grade '", grade_str,
                "' is not an integer");
        require(grade >= 0, path, " line ", i + 1, ": negative grade");
        auto& per_query = qrels.judgments[qid];
        auto [it, inserted] = per_query.emplace(did, grade);
        require(inserted, path, " line ", i + 1, ": duplicate judgment (", qid,
                ", ", did, ")");
    }
    return qrels;
}

/// TREC run lines: "qid Q0 docid rank score tag", rank from 1, score with six
/// decimal places, queries in ascending id order.
inline void save_run(const Run& run, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), "cannot open '", path, "' for writing");
    char score_buf[64];
    for (const auto& [qid, docs] : run.rankings) {
        for (std::size_t i = 0; i < docs.size(); ++i) {
            std::snprintf(score_buf, sizeof(score_buf), "%.6f", docs[i].score);
            out << qid << " Q0 " << docs[i].doc_id << " " << (i + 1) << " "
                << score_buf << " " << run.tag << "\n";
        }
    }
    require(out.good(), "write to '", path, "' failed");
}

/// Reads a TREC run. The rank column is authoritative for ordering (scores in
/// the file are rounded to six decimals).
inline Run load_run(const std::string& path) {
    Run run;
    run.tag.clear();
    std::map<std::string, std::vector<std::pair<std::uint64_t, ScoredDoc>>> acc;
    const auto lines = detail::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::blank(lines[i])) {
            continue;
        }
        std::istringstream ss(lines[i]);
        std::string qid, q0, did, rank_str, score_str, tag, extra;
        ss >> qid >> q0 >> did >> rank_str >> score_str >> tag;
        require(!tag.empty() && !(ss >> extra), path, " line ", i + 1,
                ": expected 'qid Q0 docid rank score tag'");
        std::uint64_t rank = 0;
        auto rc = std::from_chars(rank_str.data(),
                                  rank_str.data() + rank_str.size(), rank);
        require(rc.ec == std::errc{} &&
                    rc.ptr == rank_str.data() + rank_str.size() && rank >= 1,
                path, " line ", i + 1, ": bad rank '", rank_str, "'");
        double score = 0.0;
        try {
            std::size_t used = 0;
            score = std::stod(score_str, &used);
            require(used == score_str.size(), "trailing characters");
        } catch (const std::exception&) {
            fail(path, " line ", i + 1, ": bad score '", score_str, "'");
        }
        if (run.tag.empty()) {
            run.tag = tag;
        }
        acc[qid].push_back({rank, ScoredDoc{did, score}});
    }
    for (auto& [qid, entries] : acc) {
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        auto& docs = run.rankings[qid];
        std::map<std::string, bool> seen;
        for (auto& [rank, sd] : entries) {
            require(!seen.count(sd.doc_id), path, ": duplicate doc '", sd.doc_id,
                    "' for query '", qid, "'");
            seen[sd.doc_id] = true;
            docs.push_back(std::move(sd));
        }
    }
    return run;
}

}  // namespace mergeir
