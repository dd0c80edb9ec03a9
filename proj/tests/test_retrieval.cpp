#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "mergeir/bm25.hpp"
#include "mergeir/encoder.hpp"
#include "mergeir/ir_data.hpp"
#include "mergeir/retrieval.hpp"
#include "mergeir/rng.hpp"

#include "oracles.hpp"
#include "support.hpp"

using namespace mergeir;
using testsupport::TempDir;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("qrels lines parse into graded judgments") {
    TempDir tmp;
    testsupport::write_file(tmp.file("q.qrels"), "q1 0 d7 2\nq1 0 d8 0\nq2 0 d7 1\n");
    const auto qrels = load_qrels(tmp.file("q.qrels"));
    REQUIRE(qrels.grade("q1", "d7") == 2);
    REQUIRE(qrels.grade("q1", "d8") == 0);
    REQUIRE(qrels.grade("q2", "d7") == 1);
    REQUIRE(qrels.has_positive("q1"));
}

TEST_CASE("empty qrels file is valid") {
    TempDir tmp;
    testsupport::write_file(tmp.file("empty.qrels"), "");
    const auto qrels = load_qrels(tmp.file("empty.qrels"));
    REQUIRE(qrels.judgments.empty());
}

TEST_CASE("qrels loader reports malformed lines by number") {
    TempDir tmp;
    testsupport::write_file(tmp.file("bad.qrels"), "q1 0 d7 2\nq1 0 d8\n");
    REQUIRE_THROWS_WITH(load_qrels(tmp.file("bad.qrels")),
                        ContainsSubstring("line 2"));

    testsupport::write_file(tmp.file("neg.qrels"), "q1 0 d7 -1\n");
    REQUIRE_THROWS_WITH(load_qrels(tmp.file("neg.qrels")),
                        ContainsSubstring("negative grade"));

    testsupport::write_file(tmp.file("dup.qrels"), "q1 0 d7 1\nq1 0 d7 1\n");
    REQUIRE_THROWS_WITH(load_qrels(tmp.file("dup.qrels")),
                        ContainsSubstring("duplicate judgment"));
}

TEST_CASE("corpus loader enforces unique ids and valid JSON") {
    TempDir tmp;
    testsupport::write_file(
        tmp.file("c.jsonl"),
        R"({"_id":"d1","title":"T","text":"hello"})" "\n"
        R"({"_id":"d2","text":"no title"})" "\n");
    const auto corpus = load_corpus(tmp.file("c.jsonl"));
    REQUIRE(corpus.docs.size() == 2);
    REQUIRE(corpus.docs.at("d1").title == "T");
    REQUIRE(corpus.docs.at("d2").title.empty());

    testsupport::write_file(tmp.file("dup.jsonl"),
                            R"({"_id":"d1","text":"a"})" "\n"
                            R"({"_id":"d1","text":"b"})" "\n");
    REQUIRE_THROWS_WITH(load_corpus(tmp.file("dup.jsonl")),
                        ContainsSubstring("duplicate doc_id"));

    testsupport::write_file(tmp.file("broken.jsonl"),
                            R"({"_id":"d1","text":"a"})" "\n" "{oops\n");
    REQUIRE_THROWS_WITH(load_corpus(tmp.file("broken.jsonl")),
                        ContainsSubstring("line 2"));

    testsupport::write_file(tmp.file("empty.jsonl"), "\n");
    REQUIRE_THROWS_WITH(load_corpus(tmp.file("empty.jsonl")),
                        ContainsSubstring("no documents"));
}

TEST_CASE("query loader enforces unique ids") {
    TempDir tmp;
    testsupport::write_file(tmp.file("q.jsonl"),
                            R"({"_id":"q1","text":"cat"})" "\n"
                            R"({"_id":"q1","text":"dog"})" "\n");
    REQUIRE_THROWS_WITH(load_queries(tmp.file("q.jsonl")),
                        ContainsSubstring("duplicate query_id"));
}

TEST_CASE("run files round-trip through the TREC format") {
    TempDir tmp;
    Run run = testsupport::make_run(
        "sys", {{"q1", {{"d2", 0.9}, {"d1", 0.5}}}, {"q2", {{"d3", 1.25}}}});
    save_run(run, tmp.file("run.trec"));
    const auto text = testsupport::read_file(tmp.file("run.trec"));
    REQUIRE(text == "q1 Q0 d2 1 0.900000 sys\n"
                    "q1 Q0 d1 2 0.500000 sys\n"
                    "q2 Q0 d3 1 1.250000 sys\n");
    const auto loaded = load_run(tmp.file("run.trec"));
    REQUIRE(loaded.tag == "sys");
    REQUIRE(loaded.rankings.at("q1").size() == 2);
    REQUIRE(loaded.rankings.at("q1")[0].doc_id == "d2");
    REQUIRE(loaded.rankings.at("q1")[1].doc_id == "d1");
    REQUIRE(loaded.rankings.at("q2")[0].score == 1.25);

    testsupport::write_file(tmp.file("dup.trec"),
                            "q1 Q0 d1 1 1.0 t\nq1 Q0 d1 2 0.5 t\n");
    REQUIRE_THROWS_WITH(load_run(tmp.file("dup.trec")),
                        ContainsSubstring("duplicate doc"));

    testsupport::write_file(tmp.file("short.trec"), "q1 Q0 d1 1 1.0\n");
    REQUIRE_THROWS_WITH(load_run(tmp.file("short.trec")),
                        ContainsSubstring("line 1"));
}

namespace {

Corpus corpus_of(const std::vector<std::pair<std::string, std::string>>& docs) {
    Corpus c;
    for (const auto& [id, text] : docs) {
        c.docs[id] = DocEntry{"", text};
    }
    return c;
}

}  // namespace

TEST_CASE("BM25 matches the hand-evaluated three-document fixture") {
    // corpus {d1:"cat", d2:"cat cat", d3:"dog"}, query "cat"
    // N=3, df(cat)=2 -> idf = ln(1 + 1.5/2.5) = ln(1.6); avgdl = 4/3
    const auto corpus = corpus_of({{"d1", "cat"}, {"d2", "cat cat"}, {"d3", "dog"}});
    QuerySet queries;
    queries.queries["q"] = "cat";
    TokenizerSpec spec;
    const auto run = bm25_retrieve(corpus, queries, Bm25Params{}, spec, 10);

    const double idf = std::log(1.6);
    // d1: tf=1, |d|=1: 1.9 / (1 + 0.9*(0.6 + 0.4*(3.0/4.0)))
    const double d1 = idf * 1.9 / (1.0 + 0.9 * (0.6 + 0.4 * (3.0 / 4.0)));
    // d2: tf=2, |d|=2: 2*1.9 / (2 + 0.9*(0.6 + 0.4*(6.0/4.0)))
    const double d2 = idf * 2.0 * 1.9 / (2.0 + 0.9 * (0.6 + 0.4 * (6.0 / 4.0)));

    const auto& ranked = run.rankings.at("q");
    REQUIRE(ranked.size() == 2);  // d3 shares no term and is omitted
    REQUIRE(ranked[0].doc_id == "d2");
    REQUIRE(ranked[0].score == Catch::Approx(d2).margin(1e-9));
    REQUIRE(ranked[1].doc_id == "d1");
    REQUIRE(ranked[1].score == Catch::Approx(d1).margin(1e-9));
}

TEST_CASE("single-document corpus idf is ln(4/3)") {
    const auto corpus = corpus_of({{"d1", "vitamin"}});
    QuerySet queries;
    queries.queries["q"] = "vitamin";
    const auto run = bm25_retrieve(corpus, queries, Bm25Params{},
                                   TokenizerSpec{}, 10);
    // tf=1 and |d| = avgdl, so the tf component is exactly 1
    REQUIRE(run.rankings.at("q")[0].score ==
            Catch::Approx(std::log(4.0 / 3.0)).margin(1e-12));
}

TEST_CASE("out-of-vocabulary query returns an empty ranking") {
    const auto corpus = corpus_of({{"d1", "alpha beta"}, {"d2", "gamma"}});
    QuerySet queries;
    queries.queries["q"] = "zzqqxx";
    const auto run = bm25_retrieve(corpus, queries, Bm25Params{},
                                   TokenizerSpec{}, 10);
    REQUIRE(run.rankings.at("q").empty());
}

TEST_CASE("BM25 agrees with the formula oracle on random corpora") {
    TokenizerSpec spec;
    Xoshiro256 rng(404);
    const std::vector<std::string> vocab = {"alpha", "beta", "gamma", "delta",
                                            "epsilon", "zeta", "eta", "theta"};
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n_docs = 2 + rng.below(9);
        Corpus corpus;
        std::vector<std::vector<std::uint32_t>> doc_terms;
        std::vector<std::string> doc_ids;
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string text;
            const std::size_t len = 1 + rng.below(12);
            for (std::size_t w = 0; w < len; ++w) {
                text += vocab[rng.below(vocab.size())] + " ";
            }
            const std::string id = "d" + std::to_string(d);
            corpus.docs[id] = DocEntry{"", text};
            doc_ids.push_back(id);
            doc_terms.push_back(term_ids(Corpus::full_text(corpus.docs[id]), spec));
        }
        QuerySet queries;
        std::string qtext;
        const std::size_t qlen = 1 + rng.below(4);
        for (std::size_t w = 0; w < qlen; ++w) {
            qtext += vocab[rng.below(vocab.size())] + " ";
        }
        queries.queries["q"] = qtext;

        const auto run =
            bm25_retrieve(corpus, queries, Bm25Params{}, spec, n_docs);
        const auto query_terms = term_ids(qtext, spec);
        for (const auto& sd : run.rankings.at("q")) {
            const std::size_t idx =
                std::find(doc_ids.begin(), doc_ids.end(), sd.doc_id) -
                doc_ids.begin();
            const double expect = oracles::bm25_brute_force(
                doc_terms, query_terms, idx, 0.9, 0.4);
            REQUIRE(sd.score == Catch::Approx(expect).margin(1e-9));
        }
        validate_run(run);
    }
}

TEST_CASE("BM25 parameter validation") {
    REQUIRE_THROWS_AS((Bm25Params{0.0, 0.4}).validate(), error);
    REQUIRE_THROWS_AS((Bm25Params{0.9, 1.5}).validate(), error);
}

namespace {

struct DenseFixture {
    EncoderConfig config;
    TensorArchive archive;
    TokenizerSpec spec;

    DenseFixture() {
        config.vocab_size = 512;
        config.d_model = 16;
        config.n_layers = 2;
        config.n_heads = 2;
        config.d_ff = 32;
        config.max_seq = 32;
        config.seed = 5;
        archive = init_encoder(config);
        spec = config.tokenizer();
    }
};

}  // namespace

TEST_CASE_METHOD(DenseFixture, "a verbatim copy of the query ranks first") {
    Corpus corpus;
    corpus.docs["match"] = DocEntry{"", "unique phrasing of this query"};
    corpus.docs["noise1"] = DocEntry{"", "zebra quartz jolt"};
    corpus.docs["noise2"] = DocEntry{"", "mango vortex plinth"};
    QuerySet queries;
    queries.queries["q"] = "unique phrasing of this query";

    const auto run = dense_retrieve(archive, config, spec, corpus, queries, 3);
    const auto& ranked = run.rankings.at("q");
    REQUIRE(ranked[0].doc_id == "match");
    REQUIRE(ranked[0].score == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE_METHOD(DenseFixture, "k beyond the corpus returns every document") {
    Corpus corpus;
    corpus.docs["a"] = DocEntry{"", "first"};
    corpus.docs["b"] = DocEntry{"", "second"};
    QuerySet queries;
    queries.queries["q"] = "anything";
    const auto run = dense_retrieve(archive, config, spec, corpus, queries, 50);
    REQUIRE(run.rankings.at("q").size() == 2);
}

TEST_CASE_METHOD(DenseFixture, "identical documents tie in doc_id order") {
    Corpus corpus;
    corpus.docs["zz"] = DocEntry{"", "same words here"};
    corpus.docs["aa"] = DocEntry{"", "same words here"};
    corpus.docs["mm"] = DocEntry{"", "unrelated filler content"};
    QuerySet queries;
    queries.queries["q"] = "same words here";
    const auto run = dense_retrieve(archive, config, spec, corpus, queries, 3);
    const auto& ranked = run.rankings.at("q");
    REQUIRE(ranked[0].doc_id == "aa");
    REQUIRE(ranked[1].doc_id == "zz");
    REQUIRE(ranked[0].score == ranked[1].score);
}

TEST_CASE_METHOD(DenseFixture, "top-k equals brute-force full sort") {
    Xoshiro256 rng(2024);
    const std::vector<std::string> vocab = {"red", "green",  "blue", "cyan",
                                            "teal", "olive", "plum", "gray"};
    for (int trial = 0; trial < 3; ++trial) {
        Corpus corpus;
        const std::size_t n_docs = 50 + rng.below(151);  // up to 200
        for (std::size_t d = 0; d < n_docs; ++d) {
            std::string text;
            const std::size_t len = 1 + rng.below(6);
            for (std::size_t w = 0; w < len; ++w) {
                text += vocab[rng.below(vocab.size())] + " ";
            }
            // duplicated texts guarantee score ties
            char id[32];
            std::snprintf(id, sizeof(id), "d%03zu", d);
            corpus.docs[id] = DocEntry{"", text};
        }
        QuerySet queries;
        queries.queries["q0"] = "red blue plum";
        queries.queries["q1"] = "teal teal gray";

        const std::size_t k = 1 + rng.below(20);
        const auto run = dense_retrieve(archive, config, spec, corpus, queries, k);
        validate_run(run);

        const auto docs = embed_corpus(archive, config, spec, corpus);
        for (const auto& [qid, text] : queries.queries) {
            const auto qe = encode(archive, config, spec,
                                   config.query_prefix + text);
            std::vector<ScoredDoc> all(docs.doc_ids.size());
            for (std::size_t d = 0; d < docs.doc_ids.size(); ++d) {
                all[d] = {docs.doc_ids[d], dot(qe, docs.embeddings[d])};
            }
            const auto expect = oracles::top_k_full_sort(all, k);
            const auto& got = run.rankings.at(qid);
            REQUIRE(got.size() == expect.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                REQUIRE(got[i].doc_id == expect[i].doc_id);
                REQUIRE(got[i].score == expect[i].score);
            }
        }
    }
}

TEST_CASE("hard negative mining filters judged-relevant docs") {
    Qrels qrels;
    qrels.judgments["q1"]["dA"] = 1;
    qrels.judgments["q1"]["dB"] = 0;
    const Run run = testsupport::make_run(
        "bm25", {{"q1", {{"dA", 3.0}, {"dB", 2.0}, {"dC", 1.0}}}});

    const auto mined = mine_hard_negatives(run, qrels, 30);
    REQUIRE(mined.negatives.at("q1") == std::vector<std::string>{"dB", "dC"});
    REQUIRE(mined.warnings.empty());
}

TEST_CASE("mining yields nothing when everything retrieved is relevant") {
    Qrels qrels;
    qrels.judgments["q1"]["dA"] = 1;
    qrels.judgments["q1"]["dB"] = 2;
    const Run run =
        testsupport::make_run("bm25", {{"q1", {{"dA", 3.0}, {"dB", 2.0}}}});
    REQUIRE(mine_hard_negatives(run, qrels, 30).negatives.at("q1").empty());
}

TEST_CASE("mining truncates to n") {
    Qrels qrels;
    qrels.judgments["q1"]["dA"] = 1;
    const Run run = testsupport::make_run(
        "bm25", {{"q1", {{"dB", 3.0}, {"dC", 2.0}, {"dD", 1.0}}}});
    REQUIRE(mine_hard_negatives(run, qrels, 1).negatives.at("q1") ==
            std::vector<std::string>{"dB"});
}

TEST_CASE("queries missing from the qrels are kept but flagged") {
    Qrels qrels;
    qrels.judgments["other"]["dX"] = 1;
    const Run run =
        testsupport::make_run("bm25", {{"q9", {{"dA", 2.0}, {"dB", 1.0}}}});
    const auto mined = mine_hard_negatives(run, qrels, 30);
    REQUIRE(mined.negatives.at("q9") == std::vector<std::string>{"dA", "dB"});
    REQUIRE(mined.warnings == std::vector<std::string>{"q9"});
}

TEST_CASE("no positively judged document ever appears in a mined list") {
    Xoshiro256 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        Qrels qrels;
        Run run;
        run.tag = "r";
        std::vector<ScoredDoc> docs;
        for (int d = 0; d < 12; ++d) {
            const std::string did = "d" + std::to_string(d);
            const auto grade = static_cast<int>(rng.below(3));  // 0..2
            if (rng.below(2) == 0) {
                qrels.judgments["q"][did] = grade;
            }
            docs.push_back({did, static_cast<double>(12 - d)});
        }
        qrels.judgments["q"]["anchor"] = 1;
        run.rankings["q"] = docs;
        const auto mined =
            mine_hard_negatives(run, qrels, 1 + rng.below(12));
        for (const auto& did : mined.negatives.at("q")) {
            REQUIRE(qrels.grade("q", did) == 0);
        }
    }
}
