import json
import tempfile
from pathlib import Path
from unittest import TestCase, main

from finite_qrf.cli import EXIT_FAIL, EXIT_LOAD_ERROR, EXIT_PASS, build_parser, corpus_directory
from finite_qrf.cli import main as cli_main

z2_flip = corpus_directory / "z2_flip.json"
broken_covariance = corpus_directory / "broken" / "broken_covariance.json"
broken_normalization = corpus_directory / "broken" / "broken_normalization.json"


class CliTest(TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.output = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def test_check_passes(self):
        report = self.output / "z2.json"
        self.assertEqual(EXIT_PASS, cli_main(["check", str(z2_flip), "--report", str(report)]))
        data = json.loads(report.read_bytes())
        self.assertEqual("z2-flip", data["scenario"])
        self.assertEqual(0, data["summary"]["fail"])

    def test_report_is_reproducible(self):
        first, second = self.output / "first.json", self.output / "second.json"
        cli_main(["check", str(z2_flip), "--report", str(first), "--seed", "3"])
        cli_main(["check", str(z2_flip), "--report", str(second), "--seed", "3", "--jobs", "2"])
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_failing_identity(self):
        report = self.output / "broken.json"
        self.assertEqual(EXIT_FAIL, cli_main(["check", str(broken_covariance), "--report", str(report)]))
        statuses = [check["status"] for check in json.loads(report.read_bytes())["checks"]]
        self.assertEqual(["pass", "fail"], statuses)

    def test_load_error(self):
        report = self.output / "never.json"
        self.assertEqual(EXIT_LOAD_ERROR, cli_main(["check", str(broken_normalization), "--report", str(report)]))
        self.assertFalse(report.exists())
        self.assertEqual(EXIT_LOAD_ERROR, cli_main(["validate", str(self.output / "missing.json")]))

    def test_check_arguments_must_be_an_object(self):
        data = json.loads(z2_flip.read_text(encoding="utf-8"))
        data["checks"][0]["args"] = ["flip"]
        path = self.output / "list_args.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        self.assertEqual(EXIT_LOAD_ERROR, cli_main(["check", str(path), "--report", str(self.output / "never.json")]))

    def test_validate(self):
        self.assertEqual(EXIT_PASS, cli_main(["validate", str(z2_flip)]))
        self.assertEqual(EXIT_LOAD_ERROR, cli_main(["validate", str(broken_normalization)]))

    def test_tolerance_override(self):
        report = self.output / "loose.json"
        arguments = ["check", str(broken_covariance), "--tolerance", "2", "--report", str(report)]
        self.assertEqual(EXIT_PASS, cli_main(arguments))

    def test_text_report(self):
        report = self.output / "z2.txt"
        cli_main(["check", str(z2_flip), "--format", "text", "--report", str(report)])
        self.assertIn("z2-flip", report.read_text(encoding="utf-8"))

    def test_corpus(self):
        report = self.output / "corpus.json"
        self.assertEqual(EXIT_PASS, cli_main(["corpus", "--report", str(report)]))
        self.assertTrue(report.exists())

    def test_version(self):
        with self.assertRaises(SystemExit) as context:
            build_parser().parse_args(["--version"])
        self.assertEqual(0, context.exception.code)

    def test_verb_is_required(self):
        with self.assertRaises(SystemExit):
            build_parser().parse_args([])


if __name__ == "__main__":
    main()
