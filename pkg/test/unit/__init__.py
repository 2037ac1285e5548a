from .test_bundles import BundleFrameTest, FrameMorphismTest
from .test_checks import CorpusTest
from .test_cli import CliTest
from .test_group_frames import Z2FrameTest
from .test_integral import IntegralTest
from .test_scenario import BuildScenarioTest

__all__ = ["BundleFrameTest", "FrameMorphismTest", "CorpusTest", "CliTest", "Z2FrameTest", "IntegralTest",
           "BuildScenarioTest"]
