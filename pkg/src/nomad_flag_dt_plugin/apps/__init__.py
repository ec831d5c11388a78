from nomad.config.models.plugins import AppEntryPoint
from nomad.config.models.ui import (
    App,
    Column,
    Menu,
    MenuItemTerms,
    SearchQuantities,
)

SCHEMA_QN = 'nomad_flag_dt_plugin.schema_packages.schema_package.FlagDTAnalysis'

app_entry_point = AppEntryPoint(
    name='Flag DT Explorer',
    description='Browse invariant DT-instanton and pHYM runs on the flag manifold.',
    app=App(
        label='Flag DT',
        path='flagdt',
        category='Theory',
        breadcrumb='Explore flag manifold runs',
        search_quantities=SearchQuantities(include=[f'*#{SCHEMA_QN}']),
        filters_locked={'section_defs.definition_qualified_name': [SCHEMA_QN]},
        columns=[
            Column(quantity='mainfile', label='File', selected=True),
            Column(quantity='upload_create_time', label='Uploaded at', selected=True),
            Column(quantity=f'data.mode#{SCHEMA_QN}', label='Mode', selected=True),
            # Structure
            Column(
                quantity=f'data.parameters.A1#{SCHEMA_QN}',
                label='A1',
                selected=True,
                format={'decimals': 4, 'mode': 'standard'},
            ),
            Column(
                quantity=f'data.parameters.A2#{SCHEMA_QN}',
                label='A2',
                selected=True,
                format={'decimals': 4, 'mode': 'standard'},
            ),
            Column(
                quantity=f'data.parameters.A3#{SCHEMA_QN}',
                label='A3',
                selected=True,
                format={'decimals': 4, 'mode': 'standard'},
            ),
            Column(quantity=f'data.parameters.eps1#{SCHEMA_QN}', label='eps1'),
            Column(quantity=f'data.parameters.eps2#{SCHEMA_QN}', label='eps2'),
            Column(quantity=f'data.parameters.eps3#{SCHEMA_QN}', label='eps3'),
            # Results
            Column(
                quantity=f'data.results[0].irreducible_roots#{SCHEMA_QN}',
                label='Irreducible roots',
                selected=True,
            ),
            Column(
                quantity=f'data.results[0].classification.integrable#{SCHEMA_QN}',
                label='Integrable',
                selected=True,
            ),
            Column(
                quantity=f'data.results[0].classification.nearly_kahler#{SCHEMA_QN}',
                label='Nearly Kahler',
                selected=False,
            ),
            Column(
                quantity=f'data.results[0].verified#{SCHEMA_QN}',
                label='Verified',
                selected=True,
            ),
            Column(
                quantity=f'data.results[0].max_residual#{SCHEMA_QN}',
                label='Max residual',
                selected=False,
                format={'decimals': 2, 'mode': 'scientific'},
            ),
        ],
        # LEFT FILTERS
        menu=Menu(
            title='Filters',
            items=[
                MenuItemTerms(title='Mode', quantity=f'data.mode#{SCHEMA_QN}'),
                MenuItemTerms(
                    title='Irreducible roots',
                    quantity=f'data.results[0].irreducible_roots#{SCHEMA_QN}',
                ),
            ],
        ),
    ),
)
