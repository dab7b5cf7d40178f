#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = MVPERF_CLI_PATH;

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / "mvperf-cli-tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
};

int run(const std::string& args, const fs::path& out_file = {}) {
  std::string cmd = kCli + " " + args;
  if (!out_file.empty()) cmd += " >" + out_file.string() + " 2>&1";
  else cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("end-to-end workflow over the command line") {
  Workspace ws;
  const fs::path data = ws.dir / "data";
  const fs::path model = ws.dir / "model.txt";

  SECTION("gen, train, predict, eval on a separable dataset") {
    REQUIRE(run("gen --out " + data.string() +
                " --n 60 --views 2 --dims 3,4 --margin 2 --noise 0 --seed 5") == 0);
    REQUIRE(fs::exists(data / "manifest.json"));
    REQUIRE(fs::exists(data / "view_1.txt"));
    REQUIRE(fs::exists(data / "view_2.txt"));

    const std::string manifest = (data / "manifest.json").string();
    REQUIRE(run("train --data " + manifest +
                " --measure err --c1 10 --c2 1 --max-iter 50 --eps 1e-4 --out " +
                model.string()) == 0);
    REQUIRE(fs::exists(model));
    REQUIRE(fs::exists(model.string() + ".log"));
    const std::string log = slurp(model.string() + ".log");
    CHECK(log.rfind("t,xi,violation,primal\n", 0) == 0);

    // identical invocation produces byte-identical artifacts
    const fs::path model2 = ws.dir / "model2.txt";
    REQUIRE(run("train --data " + manifest +
                " --measure err --c1 10 --c2 1 --max-iter 50 --eps 1e-4 --out " +
                model2.string()) == 0);
    CHECK(slurp(model) == slurp(model2));
    CHECK(slurp(model.string() + ".log") == slurp(model2.string() + ".log"));

    const fs::path pred = ws.dir / "pred.txt";
    REQUIRE(run("predict --data " + manifest + " --model " + model.string() +
                " --out " + pred.string()) == 0);
    std::istringstream lines(slurp(pred));
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      ++count;
      CHECK((line == "+1" || line == "-1"));
    }
    CHECK(count == 60);

    const fs::path eval_out = ws.dir / "eval.txt";
    REQUIRE(run("eval --data " + manifest + " --model " + model.string() +
                " --measure err",
                eval_out) == 0);
    const std::string eval_text = slurp(eval_out);
    CHECK(eval_text.find("measure err") != std::string::npos);
    CHECK(eval_text.find("loss 0\n") != std::string::npos);
    CHECK(eval_text.find("fp 0") != std::string::npos);
    CHECK(eval_text.find("fn 0") != std::string::npos);
  }

  SECTION("error paths exit with their documented codes") {
    REQUIRE(run("gen --out " + data.string() + " --n 12 --views 2 --dims 2 --seed 3") ==
            0);
    const std::string manifest = (data / "manifest.json").string();
    REQUIRE(run("train --data " + manifest + " --measure f1 --out " + model.string()) ==
            0);

    CHECK(run("nonsense") == 1);            // unknown subcommand
    CHECK(run("train --data x --measure f1 --out y --bogus 1") == 1);  // unknown flag
    CHECK(run("train --data " + ws.dir.string() + "/missing.json --measure f1 --out " +
              model.string()) == 2);        // missing file
    CHECK(run("train --data " + manifest + " --measure nope --out " + model.string()) ==
          3);                               // bad measure
    CHECK(run("train --data " + manifest + " --measure err --c1 0 --out " +
              model.string()) == 3);        // bad config
    CHECK(run("eval --data " + manifest + " --model " + model.string() +
              " --measure prec@999") == 3); // k > n

    // dimension mismatch: model trained on different dims
    const fs::path other = ws.dir / "other";
    const fs::path other_model = ws.dir / "other-model.txt";
    REQUIRE(run("gen --out " + other.string() + " --n 12 --views 2 --dims 5 --seed 3") ==
            0);
    REQUIRE(run("train --data " + (other / "manifest.json").string() +
                " --measure f1 --out " + other_model.string()) == 0);
    CHECK(run("predict --data " + manifest + " --model " + other_model.string() +
              " --out " + (ws.dir / "p.txt").string()) == 4);
  }

  SECTION("verify runs the oracle suites") {
    const fs::path out = ws.dir / "verify.txt";
    REQUIRE(run("verify --suite prediction", out) == 0);
    CHECK(slurp(out).find("prediction: pass 100/100") != std::string::npos);
    CHECK(run("verify --suite bogus") == 3);
  }
}
