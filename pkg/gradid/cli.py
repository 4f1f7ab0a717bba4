import logging
import os
import pprint

import click

import gradid
from .errors import ConfigError
from .experiment import ExperimentConfig, row_passed
from .utils import format_result_rows, format_variance_rows

RUNNER_TYPES = ['ExperimentRunner', 'ParallelRunner']


@click.group()
@click.option("--verbose",
              default=False,
              is_flag=True,
              help="Log oracle and estimator progress on stderr")
def cli(verbose):
    """
    A command line interface to gradid, the gradient identity checker.
    """
    if verbose:
        logging.basicConfig(level=logging.DEBUG)


def _fail(ctx, message, status):
    click.echo("Error: %s" % message, err=True)
    ctx.exit(status)


def _load_config(ctx, config_file, seed):
    try:
        config = ExperimentConfig.from_file(config_file)
        if seed is not None:
            config = config.with_seed(seed)
    except ConfigError as e:
        _fail(ctx, e, 2)
    return config


def _create_runner(config, runner_type, max_processes):
    gradid.parallelrunner.MAX_PARALLEL_PROCESSES = max_processes
    return gradid.manager.RUNNER_TYPES[runner_type](config)


def _emit(text, out):
    if out is None:
        click.echo(text, nl=False)
    else:
        with open(out, 'w') as f:
            f.write(text)


config_argument = click.argument(
    'config_file', type=click.Path(exists=True, dir_okay=False,
                                   readable=True))
out_option = click.option(
    "--out",
    type=click.Path(dir_okay=False, writable=True),
    default=None,
    help="File where results are written (default: stdout)")
seed_option = click.option(
    "--seed",
    type=click.IntRange(0, 2 ** 64 - 1),
    default=None,
    help="Seed overriding the one in the configuration file")
runner_option = click.option(
    "--runner-type",
    type=click.Choice(RUNNER_TYPES),
    default='ExperimentRunner',
    show_default=True,
    help="The Runner class to employ")
processes_option = click.option(
    "--max-processes",
    type=click.INT,
    default=None,
    help="The maximum number of parallel processes spawned by "
    "ParallelRunner")
progress_option = click.option(
    "--no-progress",
    default=False,
    is_flag=True,
    help="Hide the progress bar")


#######
# Run #
#######

@cli.command()
@config_argument
@out_option
@seed_option
@runner_option
@processes_option
@progress_option
@click.pass_context
def run(ctx, config_file, out, seed, runner_type, max_processes,
        no_progress):
    """
    Run the estimators of a configuration and check them against their
    oracles.

    Exits with status 0 if every coordinate is within four standard errors
    of its oracle, 1 otherwise, and 2 on configuration errors.
    """
    config = _load_config(ctx, config_file, seed)
    runner = _create_runner(config, runner_type, max_processes)
    try:
        rows = runner.run(show_progress=not no_progress)
    except ArithmeticError as e:
        _fail(ctx, "%s: %s" % (type(e).__name__, e), 1)

    _emit(format_result_rows(rows), out)

    if config.oracle:
        failed = [r for r in rows if not row_passed(r)]
        click.echo("%s/%s coordinates within the acceptance band" %
                   (len(rows) - len(failed), len(rows)), err=True)
        if failed:
            ctx.exit(1)


####################
# Compare variance #
####################

@cli.command('compare-variance')
@config_argument
@out_option
@seed_option
@runner_option
@processes_option
@progress_option
@click.pass_context
def compare_variance(ctx, config_file, out, seed, runner_type,
                     max_processes, no_progress):
    """
    Report the per-sample variance of estimators sharing a target.

    Estimators draw from the same stream. The only check is that Price on a
    quadratic integrand has zero variance.
    """
    config = _load_config(ctx, config_file, seed)
    runner = _create_runner(config, runner_type, max_processes)
    try:
        rows = runner.compare_variance(show_progress=not no_progress)
    except ConfigError as e:
        _fail(ctx, e, 2)

    _emit(format_variance_rows(rows), out)

    violations = runner.exactness_violations(rows)
    if violations:
        click.echo("Price on a quadratic integrand has nonzero spread: %s" %
                   ', '.join("%s=%.3g" % (r.coord, r.std_error)
                             for r in violations), err=True)
        ctx.exit(1)


#############
# Replicate #
#############

@cli.command()
@config_argument
@click.option("--campaign-dir",
              type=click.Path(file_okay=False, resolve_path=True),
              required=True,
              help="Directory where the campaign database is kept")
@click.option("--runs",
              type=click.IntRange(1),
              required=True,
              help="Total number of replications (seeds) wanted")
@click.option("--overwrite",
              default=False,
              is_flag=True,
              help="Discard the replications stored in the campaign "
              "directory, or a campaign for another experiment")
@runner_option
@processes_option
@progress_option
@click.pass_context
def replicate(ctx, config_file, campaign_dir, runs, overwrite, runner_type,
              max_processes, no_progress):
    """
    Replicate a configuration over the lowest free seeds.
    """
    config = _load_config(ctx, config_file, None)
    gradid.parallelrunner.MAX_PARALLEL_PROCESSES = max_processes
    try:
        campaign = gradid.CampaignManager.new(config, campaign_dir,
                                              runner_type=runner_type,
                                              overwrite=overwrite)
    except (ValueError, FileExistsError) as e:
        _fail(ctx, e, 2)
    click.echo(campaign)
    campaign.run_missing_experiments(runs, show_progress=not no_progress)

    coverage = campaign.coverage()
    if config.oracle:
        for label, value in zip(coverage['row'].values, coverage.values):
            click.echo("%s: %.4f" % (label, value))


########
# View #
########

@cli.command()
@click.option("--campaign-dir",
              type=click.Path(exists=True, file_okay=False,
                              resolve_path=True),
              required=True,
              help="Directory containing the campaign")
@click.option("--seed",
              type=click.INT,
              default=None,
              help="Only show the result of this seed")
@click.option("--no-pager",
              is_flag=True,
              help="If used, directly print the results without passing"
              " through a pager.")
def view(campaign_dir, seed, no_pager):
    """
    View the results of a campaign.

    With --seed, the rows of that replication are printed as CSV.
    """
    campaign = gradid.CampaignManager.load(campaign_dir)
    if seed is None:
        output = '\n\n\n'.join([pprint.pformat(item) for item in
                                campaign.db.get_results()])
    else:
        try:
            output = format_result_rows(campaign.get_rows(seed))
        except ValueError as e:
            raise click.BadParameter(str(e), param_hint='--seed')
    if no_pager:
        click.echo(output)
    else:
        click.echo_via_pager(output)


##########
# Export #
##########

@cli.command()
@click.option("--campaign-dir",
              type=click.Path(exists=True, file_okay=False,
                              resolve_path=True),
              required=True,
              help="Directory containing the campaign")
@click.argument('filename', type=click.Path(resolve_path=True))
def export(campaign_dir, filename):
    """
    Export the results of a campaign to file.

    The extension of filename selects the format:

    .mat (Matlab file),
    .npy (Numpy file)
    """
    _, extension = os.path.splitext(filename)
    if extension not in ['.mat', '.npy']:
        raise click.BadParameter("Format not recognized: %s" % extension,
                                 param_hint='filename')

    campaign = gradid.CampaignManager.load(campaign_dir)
    if extension == '.mat':
        campaign.save_to_mat_file(filename)
    else:
        campaign.save_to_npy_file(filename)
