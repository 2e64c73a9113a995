import unittest

import run_tests


class TestBuildSuite(unittest.TestCase):

    def test_named_class(self):
        self.assertEqual(run_tests.build_suite('test_ingest.TestDetectKind').countTestCases(), 3)

    def test_named_method(self):
        suite = run_tests.build_suite('test_ingest.TestDetectKind.test_unknown_header')
        self.assertEqual(suite.countTestCases(), 1)

    def test_unknown_name(self):
        with self.assertRaises(LookupError):
            run_tests.build_suite('test_nothing_here')
        self.assertEqual(run_tests.main(['run_tests.py', 'test_ingest.NoSuchClass']), 1)


if __name__ == '__main__':
    unittest.main()
