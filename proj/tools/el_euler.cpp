// el-euler run|verify|probe <config>
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure,
// 3 I/O error, 4 verify found a failing check.

#include "eleuler/config.hpp"
#include "eleuler/driver.hpp"
#include "eleuler/errors.hpp"
#include "eleuler/parallel.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <string>

namespace {

int fail(const char* category, const std::string& msg, int code) {
  std::string line = msg;
  for (char& ch : line)
    if (ch == '\n') ch = ' ';
  std::cerr << "error: " << category << ": " << line << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eulerian-Lagrangian Euler solver on the torus"};
  app.require_subcommand(1);
  std::string config_path;
  for (const char* name : {"run", "verify", "probe"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " the configuration");
    sub->add_option("config", config_path, "key = value configuration file")->required();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 1);
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const eleuler::SolverConfig cfg = eleuler::load_config(config_path);
    std::cout << "threads: " << eleuler::thread_count() << "\n";
    if (cmd == "run") {
      eleuler::run(cfg, std::cout);
    } else if (cmd == "probe") {
      eleuler::probe(cfg, std::cout);
    } else {
      const eleuler::VerifyResult r = eleuler::verify(cfg, std::cout);
      if (!r.passed()) {
        for (const auto& c : r.checks)
          if (!c.passed) return fail("verify", c.name + ": " + c.detail, 4);
        return fail("verify", "no checks ran", 4);
      }
    }
  } catch (const eleuler::ConfigError& e) {
    return fail("config", e.what(), 1);
  } catch (const eleuler::IoError& e) {
    return fail("io", e.what(), 3);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("io", e.what(), 3);
  } catch (const std::ios_base::failure& e) {
    return fail("io", e.what(), 3);
  } catch (const eleuler::SolverError& e) {
    return fail("solver", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("solver", e.what(), 2);
  }
  return 0;
}
