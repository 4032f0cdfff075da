#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "secagg/error.hpp"
#include "secagg/session_config.hpp"

using namespace secagg;
namespace fs = std::filesystem;

namespace {

JobConfig parse(const std::string& text, const fs::path& base = ".") {
  std::istringstream in(text);
  return parse_job_config(in, base);
}

Error error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "config accepted: " << text;
  return Error(Errc::IoError, "");
}

}  // namespace

TEST(JobConfig, GeneratedDatasetsAndDefaults) {
  const auto job = parse(
      "# comment\n"
      "variant = v1\n"
      "n = 3\n"
      "query = sum where value >= 10   # trailing comment\n"
      "generator_seed = 5\n"
      "generator_size = 20\n"
      "value_bound = 50\n");
  EXPECT_EQ(job.session.config.variant(), Variant::V1);
  EXPECT_EQ(job.session.config.t, 3u);
  ASSERT_EQ(job.session.datasets.size(), 3u);
  EXPECT_EQ(job.session.datasets[1].size(), 20u);
  EXPECT_EQ(job.session.datasets[1].party_id(), 2u);
  const auto again = generate_dataset(5 * 7919 + 1, 20, 50);
  EXPECT_TRUE(std::equal(again.values().begin(), again.values().end(), job.session.datasets[1].values().begin()));
  EXPECT_EQ(job.request.query, parse_query("sum where value >= 10"));
  EXPECT_EQ(job.rounds, 1u);
  EXPECT_EQ(job.session.transport, TransportKind::InProc);
}

TEST(JobConfig, AllKeys) {
  const auto job = parse(
      "variant = v3\nn = 4\nt_rule = majority\nk = 8\nquery_id = 5\ntimeout_ms = 1500\n"
      "transport = tcp\nsecure_channels = true\nplaintext_bound = 4096\nseed = 9\n"
      "platform_seed = 3\nhost = 127.0.0.1\nport = 4555\nrounds = 2\n");
  EXPECT_EQ(job.session.config.t, 2u);
  EXPECT_EQ(job.session.config.k, 8u);
  EXPECT_EQ(job.request.query_id, 5u);
  EXPECT_EQ(job.session.timeout.count(), 1500);
  EXPECT_EQ(job.session.transport, TransportKind::Tcp);
  EXPECT_TRUE(job.session.secure_channels);
  EXPECT_EQ(job.session.plaintext_bound, 4096u);
  EXPECT_EQ(job.session.seed, 9u);
  EXPECT_EQ(job.platform_seed, 3u);
  ASSERT_TRUE(job.session.platform);
  EXPECT_EQ(job.port, 4555);
  EXPECT_EQ(job.rounds, 2u);
}

TEST(JobConfig, HeterogeneousVector) {
  const auto job = parse("variant = hetero\nn = 3\nt = 2\nk = 4\naggregator = crypto\nparty_mechs = tee, crypto,tee\n");
  const auto& c = job.session.config;
  EXPECT_EQ(c.variant(), Variant::Heterogeneous);
  EXPECT_EQ(c.aggregator_mech, Mechanism::Crypto);
  EXPECT_EQ(c.party_mechs, (std::vector{Mechanism::Tee, Mechanism::Crypto, Mechanism::Tee}));
  EXPECT_EQ(error_of("variant = hetero\nn = 3\nparty_mechs = tee\n").code(), Errc::InvalidConfig);
}

TEST(JobConfig, DatasetFilesRelativeToConfig) {
  const auto dir = fs::temp_directory_path() / "secagg_config_test";
  fs::create_directories(dir);
  std::ofstream(dir / "a.csv") << "1\n2\n";
  std::ofstream(dir / "b.csv") << "30\n";
  std::ofstream(dir / "job.conf") << "variant = v6\nn = 2\ndatasets = a.csv, b.csv\n";
  const auto job = load_job_config(dir / "job.conf");
  EXPECT_EQ(job.session.datasets[0].size(), 2u);
  EXPECT_EQ(job.session.datasets[1].values()[0], 30);
  EXPECT_EQ(job.session.datasets[1].party_id(), 2u);
}

TEST(JobConfig, Errors) {
  const auto unknown = error_of("variant = v1\nn = 1\ncolour = red\n");
  EXPECT_EQ(unknown.code(), Errc::ParseError);
  EXPECT_NE(std::string(unknown.what()).find("line 3"), std::string::npos);
  EXPECT_EQ(error_of("variant = v1\nn = 1\nn = 2\n").code(), Errc::ParseError);
  EXPECT_EQ(error_of("variant = v1\nn = x\n").code(), Errc::ParseError);
  EXPECT_EQ(error_of("variant v1\n").code(), Errc::ParseError);
  EXPECT_EQ(error_of("n = 2\n").code(), Errc::InvalidConfig);
  EXPECT_EQ(error_of("variant = v5\nn = 2\nquery_id = 0\nt = 3\n").code(), Errc::InvalidConfig);
  EXPECT_EQ(error_of("variant = v1\nn = 2\ndatasets = one.csv\n").code(), Errc::InvalidConfig);
  EXPECT_EQ(error_of("variant = v1\nn = 1\nrounds = 0\n").code(), Errc::InvalidConfig);
  EXPECT_EQ(error_of("variant = v1\nn = 1\nquery = median\n").code(), Errc::QueryMalformed);
  EXPECT_EQ(error_of("variant = v1\nn = 1\nsecure_channels = maybe\n").code(), Errc::ParseError);
  EXPECT_EQ(error_of("variant = v1\nn = 1\ndatasets = /nonexistent/x.csv\n").code(), Errc::IoError);
  EXPECT_THROW(load_job_config("/nonexistent/job.conf"), Error);
}

TEST(JobConfig, RunsEndToEnd) {
  auto job = parse("variant = v2\nn = 2\nquery = count where value < 8\ngenerator_size = 30\nvalue_bound = 16\nseed = 4\n");
  auto s = Session::start(job.session);
  EXPECT_EQ(s->run_round(job.request).outcome.value(), s->oracle(job.request));
}
