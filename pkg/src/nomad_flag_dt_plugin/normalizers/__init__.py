from nomad.config.models.plugins import NormalizerEntryPoint
from pydantic import Field


class FlagDTNormalizerEntryPoint(NormalizerEntryPoint):
    tolerance: float = Field(
        1e-10, gt=0, description='Residual tolerance when re-verifying solutions.'
    )

    def load(self):
        # Import nomad.normalizing first: its __init__ loads normalizer entry
        # points, which would otherwise re-enter a half-initialised module.
        import nomad.normalizing  # noqa: F401

        from nomad_flag_dt_plugin.normalizers.normalizer import FlagDTNormalizer

        return FlagDTNormalizer(**self.model_dump())


normalizer_entry_point = FlagDTNormalizerEntryPoint(
    name='FlagDTNormalizer',
    description='Re-verifies stored flag manifold solutions against their residuals.',
)
