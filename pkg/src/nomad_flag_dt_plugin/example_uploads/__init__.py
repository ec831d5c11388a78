from nomad.config.models.plugins import ExampleUploadEntryPoint

example_upload_entry_point = ExampleUploadEntryPoint(
    title='Flag manifold DT-instantons',
    category='Examples',
    description=(
        'Run files for the nearly Kahler point, the Kahler-Einstein metric and '
        'a scan across a wall on SU(3)/T^2.'
    ),
    path='example_uploads/getting_started',
)
