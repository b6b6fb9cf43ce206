import unittest

from rlnn.selftest import CHECKS, run_checks


class SelftestTestCase(unittest.TestCase):
    def test_all_checks_pass(self):
        outcomes = run_checks()
        self.assertEqual(len(outcomes), len(CHECKS))
        failed = [(name, detail) for name, passed, detail in outcomes if not passed]
        self.assertListEqual(failed, [])


if __name__ == "__main__":
    unittest.main()
