from nomad.config.models.plugins import ParserEntryPoint
from pydantic import Field


class FlagDTParserEntryPoint(ParserEntryPoint):
    tolerance: float = Field(
        1e-10, gt=0, description='Absolute tolerance for floating point zero tests.'
    )

    def load(self):
        from .parser import FlagDTParser

        return FlagDTParser()


parser_entry_point = FlagDTParserEntryPoint(
    name='FlagDTParser',
    description='Parser for flag manifold gauge theory run files.',
    mainfile_name_re=r'.*\.flagdt(?:\.txt)?$',
)
